#include "instructlr/gateway.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "httplib.h"
#include "instructlr/error.hpp"
#include "instructlr/text.hpp"
#include "instructlr/types.hpp"

namespace instructlr {

std::size_t estimate_tokens(std::string_view text) { return text::word_count(text); }

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string replay_key(const GenerationRequest& request) {
  // Length-prefixed so that field boundaries cannot collide.
  std::string material = "instructlr-replay-v1";
  for (const std::string* field : {&request.system_preamble, &request.user_content, &request.request_tag}) {
    material += '\n';
    material += std::to_string(field->size());
    material += ':';
    material += *field;
  }
  return sha256_hex(material);
}

// ---------------------------------------------------------------- replay

ReplayStore::ReplayStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::optional<std::string> ReplayStore::get(const std::string& key) const {
  std::lock_guard lock(mu_);
  std::ifstream in(dir_ / (key + ".txt"), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ReplayStore::put(const std::string& key, const std::string& completion) {
  std::lock_guard lock(mu_);
  std::filesystem::create_directories(dir_);
  auto final_path = dir_ / (key + ".txt");
  auto tmp = final_path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write replay fixture " + tmp.string());
    out << completion;
  }
  std::filesystem::rename(tmp, final_path);
}

std::string ReplayBackend::complete(const GenerationRequest& request) {
  auto key = replay_key(request);
  if (auto hit = store_->get(key)) return *hit;
  throw FixtureMissing(key);
}

std::string RecordingBackend::complete(const GenerationRequest& request) {
  auto key = replay_key(request);
  std::shared_future<std::string> pending;
  std::promise<std::string> promise;
  bool owner = false;
  {
    std::lock_guard lock(mu_);
    if (auto hit = store_->get(key)) return *hit;
    auto it = in_flight_.find(key);
    if (it != in_flight_.end()) {
      pending = it->second;
    } else {
      pending = promise.get_future().share();
      in_flight_.emplace(key, pending);
      owner = true;
    }
  }
  if (!owner) return pending.get();

  try {
    std::string text = upstream_->complete(request);
    store_->put(key, text);
    promise.set_value(text);
  } catch (...) {
    promise.set_exception(std::current_exception());
  }
  {
    std::lock_guard lock(mu_);
    in_flight_.erase(key);
  }
  return pending.get();
}

// ---------------------------------------------------------------- rate limiting

RateLimiter::RateLimiter(double requests_per_minute, double burst)
    : rate_per_sec_(requests_per_minute / 60.0),
      capacity_(std::max(1.0, burst)),
      tokens_(capacity_),
      last_(std::chrono::steady_clock::now()) {
  if (requests_per_minute <= 0) throw std::invalid_argument("requests_per_minute must be positive");
}

void RateLimiter::acquire() {
  std::unique_lock lock(mu_);
  for (;;) {
    auto now = std::chrono::steady_clock::now();
    double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(capacity_, tokens_ + elapsed * rate_per_sec_);
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_per_sec_);
    lock.unlock();
    std::this_thread::sleep_for(wait);
    lock.lock();
  }
}

// ---------------------------------------------------------------- remote

namespace {

void split_url(const std::string& url, std::string& base, std::string& path) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("gateway url needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    base = url;
    path = "/";
  } else {
    base = url.substr(0, path_start);
    path = url.substr(path_start);
  }
}

std::string endpoint_message(const std::string& body) {
  try {
    auto j = Json::parse(body);
    if (j.contains("error")) {
      const auto& e = j["error"];
      if (e.is_object() && e.contains("message") && e["message"].is_string()) return e["message"];
      if (e.is_string()) return e.get<std::string>();
    }
  } catch (const Json::exception&) {
  }
  return body.substr(0, 500);
}

}  // namespace

RemoteBackend::RemoteBackend(RemoteOptions options)
    : opt_(std::move(options)), limiter_(opt_.requests_per_minute) {
  if (opt_.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
  split_url(opt_.url, base_, path_);
}

std::string RemoteBackend::complete(const GenerationRequest& request) {
  Json body;
  body["model"] = opt_.model;
  Json messages = Json::array();
  if (!request.system_preamble.empty())
    messages.push_back(Json{{"role", "system"}, {"content", request.system_preamble}});
  messages.push_back(Json{{"role", "user"}, {"content", request.user_content}});
  body["messages"] = std::move(messages);
  body["max_tokens"] = request.max_output_tokens;
  body["temperature"] = request.temperature;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!opt_.api_key.empty()) headers.emplace("Authorization", "Bearer " + opt_.api_key);

  std::string last_error;
  auto backoff = opt_.initial_backoff;
  for (int attempt = 1; attempt <= opt_.max_attempts; ++attempt) {
    limiter_.acquire();
    httplib::Client client(base_);
    client.set_connection_timeout(opt_.timeout_seconds);
    client.set_read_timeout(opt_.timeout_seconds);
    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status >= 200 && res->status < 300) {
      try {
        auto j = Json::parse(res->body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const Json::exception& e) {
        throw GatewayError(std::string("unexpected completion payload: ") + e.what(), false, res->status);
      }
    } else if (res->status >= 400 && res->status < 500 && res->status != 408 && res->status != 429) {
      throw GatewayError("HTTP " + std::to_string(res->status) + ": " + endpoint_message(res->body), false,
                         res->status);
    } else {
      last_error = "HTTP " + std::to_string(res->status) + ": " + endpoint_message(res->body);
    }
    if (attempt < opt_.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw GatewayError("giving up after " + std::to_string(opt_.max_attempts) + " attempts: " + last_error, true);
}

// ---------------------------------------------------------------- gateway

GenerationResult Gateway::generate(const GenerationRequest& request) const {
  if (text::trim(request.user_content).empty()) throw std::invalid_argument("generation request without user content");
  GenerationResult result;
  result.text = backend_->complete(request);
  result.input_token_estimate = estimate_tokens(request.system_preamble) + estimate_tokens(request.user_content);
  result.output_token_estimate = estimate_tokens(result.text);
  return result;
}

}  // namespace instructlr
