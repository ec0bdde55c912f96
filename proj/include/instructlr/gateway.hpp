#pragma once

// Every network call in the project goes through Gateway::generate. Backends:
//   ReplayBackend    - completions read from a content-addressed fixture directory
//   RemoteBackend    - chat-completion HTTP endpoint with retries and rate limiting
//   RecordingBackend - replay first, fall through to an upstream backend and persist
//   CallbackBackend  - in-process function, for scripted runs

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace instructlr {

struct GenerationRequest {
  std::string system_preamble;
  std::string user_content;
  int max_output_tokens = 1024;
  double temperature = 0.0;
  std::string request_tag;
};

struct GenerationResult {
  std::string text;
  std::size_t input_token_estimate = 0;
  std::size_t output_token_estimate = 0;
};

/// Word-proxy token estimate (whitespace word count). Additive over space-joined text.
std::size_t estimate_tokens(std::string_view text);

/// Lowercase hex SHA-256 of (system_preamble, user_content, request_tag).
/// Temperature and max_output_tokens are deliberately not part of the key.
std::string replay_key(const GenerationRequest& request);

std::string sha256_hex(std::string_view data);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const GenerationRequest& request) = 0;
};

/// Directory of `<key>.txt` files holding raw completions.
class ReplayStore {
 public:
  explicit ReplayStore(std::filesystem::path dir);
  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& completion);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
};

class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(std::shared_ptr<ReplayStore> store) : store_(std::move(store)) {}
  std::string complete(const GenerationRequest& request) override;

 private:
  std::shared_ptr<ReplayStore> store_;
};

/// Token bucket limiting requests per minute; acquire() blocks until a token is available.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_minute, double burst = 1.0);
  void acquire();

 private:
  std::mutex mu_;
  double rate_per_sec_;
  double capacity_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
};

struct RemoteOptions {
  std::string url;  // e.g. https://host/v1/chat/completions
  std::string model;
  std::string api_key;  // usually from INSTRUCTLR_API_KEY
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  double requests_per_minute = 60.0;
  int timeout_seconds = 120;
};

class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(RemoteOptions options);
  std::string complete(const GenerationRequest& request) override;

 private:
  RemoteOptions opt_;
  std::string base_;
  std::string path_;
  RateLimiter limiter_;
};

class RecordingBackend : public Backend {
 public:
  RecordingBackend(std::shared_ptr<ReplayStore> store, std::shared_ptr<Backend> upstream)
      : store_(std::move(store)), upstream_(std::move(upstream)) {}
  std::string complete(const GenerationRequest& request) override;

 private:
  std::shared_ptr<ReplayStore> store_;
  std::shared_ptr<Backend> upstream_;
  std::mutex mu_;
  std::map<std::string, std::shared_future<std::string>> in_flight_;
};

class CallbackBackend : public Backend {
 public:
  using Fn = std::function<std::string(const GenerationRequest&)>;
  explicit CallbackBackend(Fn fn) : fn_(std::move(fn)) {}
  std::string complete(const GenerationRequest& request) override { return fn_(request); }

 private:
  Fn fn_;
};

class Gateway {
 public:
  explicit Gateway(std::shared_ptr<Backend> backend) : backend_(std::move(backend)) {}

  /// Throws std::invalid_argument on empty user content; backend errors propagate
  /// (GatewayError, FixtureMissing).
  GenerationResult generate(const GenerationRequest& request) const;

 private:
  std::shared_ptr<Backend> backend_;
};

}  // namespace instructlr
