#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "instructlr/types.hpp"

namespace instructlr {

struct ServiceRequest {
  std::string method;  // GET or POST
  std::string path;    // without the query string
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;
};

struct ServiceResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct ServiceOptions {
  std::string token;  // empty disables the bearer check
  std::chrono::minutes lease{15};
  std::function<std::chrono::system_clock::time_point()> clock = [] { return std::chrono::system_clock::now(); };
};

/// Review backend: queue, leases and annotation intake over the checked drafts. Every
/// accepted annotation is appended to the journal before the response is sent.
/// Thread-safe; one lock serializes state changes and journal writes.
class ReviewService {
 public:
  ReviewService(std::vector<CheckedDraft> checked, std::filesystem::path journal, ServiceOptions options = {});

  ServiceResponse handle(const ServiceRequest& request);

  std::vector<AnnotationRecord> records() const;

 private:
  ServiceResponse list_drafts(const ServiceRequest& r, const std::string& annotator);
  ServiceResponse get_draft(const std::string& id);
  ServiceResponse claim(const std::string& id, const std::string& annotator);
  ServiceResponse annotate(const std::string& id, const std::string& annotator, const std::string& body);
  ServiceResponse progress();
  ServiceResponse agreement(const ServiceRequest& r);
  ServiceResponse export_csv();

  struct Lease {
    std::string annotator;
    std::chrono::system_clock::time_point expires;
  };
  bool leased_by_other(const std::string& id, const std::string& annotator) const;

  std::vector<CheckedDraft> checked_;
  std::map<std::string, std::size_t> index_;
  std::filesystem::path journal_;
  ServiceOptions opt_;
  mutable std::mutex mu_;
  std::vector<AnnotationRecord> records_;
  std::map<std::string, Lease> leases_;
};

/// HTTP front end for a ReviewService.
class ReviewServer {
 public:
  explicit ReviewServer(ReviewService& service);
  ~ReviewServer();
  /// Binds the socket; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called. bind() must have succeeded.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace instructlr
