#pragma once

#include <stdexcept>
#include <string>

namespace instructlr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text could not be parsed at all (no JSON object, malformed line, missing verdict).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, long line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Parsed text did not match the expected record shape. `field()` names the offender.
class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string& what, long line = 0)
      : Error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + "field \"" + field +
              "\": " + what),
        field_(std::move(field)),
        line_(line) {}
  const std::string& field() const { return field_; }
  long line() const { return line_; }

 private:
  std::string field_;
  long line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class GatewayError : public Error {
 public:
  GatewayError(const std::string& what, bool retriable, int http_status = 0)
      : Error(what), retriable_(retriable), http_status_(http_status) {}
  bool retriable() const { return retriable_; }
  int http_status() const { return http_status_; }

 private:
  bool retriable_;
  int http_status_;
};

class FixtureMissing : public GatewayError {
 public:
  explicit FixtureMissing(std::string key)
      : GatewayError("fixture missing for key " + key, false), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace instructlr
