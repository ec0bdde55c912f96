#include "instructlr/service.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <regex>

#include "httplib.h"
#include "instructlr/agreement.hpp"
#include "instructlr/annotation.hpp"
#include "instructlr/checker.hpp"
#include "instructlr/error.hpp"
#include "instructlr/jsonl.hpp"
#include "instructlr/text.hpp"

namespace instructlr {

namespace {

ServiceResponse json_response(int status, const Json& j) { return {status, "application/json", dump_line(j)}; }

ServiceResponse error_response(int status, const std::string& message, const std::string& field = {}) {
  Json j = {{"error", message}};
  if (!field.empty()) j["field"] = field;
  return json_response(status, j);
}

long long epoch_seconds(std::chrono::system_clock::time_point t) {
  return std::chrono::duration_cast<std::chrono::seconds>(t.time_since_epoch()).count();
}

}  // namespace

ReviewService::ReviewService(std::vector<CheckedDraft> checked, std::filesystem::path journal, ServiceOptions options)
    : checked_(std::move(checked)), journal_(std::move(journal)), opt_(std::move(options)) {
  for (std::size_t i = 0; i < checked_.size(); ++i) {
    if (!index_.emplace(checked_[i].draft.id, i).second)
      throw ConfigError("duplicate draft id " + checked_[i].draft.id);
  }
  if (std::filesystem::exists(journal_)) records_ = read_jsonl<AnnotationRecord>(journal_);
}

std::vector<AnnotationRecord> ReviewService::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

bool ReviewService::leased_by_other(const std::string& id, const std::string& annotator) const {
  auto it = leases_.find(id);
  return it != leases_.end() && it->second.annotator != annotator && it->second.expires > opt_.clock();
}

ServiceResponse ReviewService::handle(const ServiceRequest& r) {
  if (!opt_.token.empty()) {
    auto it = r.headers.find("authorization");
    if (it == r.headers.end() || it->second != "Bearer " + opt_.token)
      return error_response(401, "missing or invalid bearer token");
  }
  std::string annotator;
  if (auto it = r.headers.find("x-annotator-id"); it != r.headers.end()) annotator = std::string(text::trim(it->second));

  static const std::regex draft_re(R"(^/api/drafts/([^/]+)$)");
  static const std::regex action_re(R"(^/api/drafts/([^/]+)/(claim|annotation)$)");
  std::smatch m;
  try {
    if (r.method == "GET") {
      if (r.path == "/api/drafts") return list_drafts(r, annotator);
      if (r.path == "/api/progress") return progress();
      if (r.path == "/api/agreement") return agreement(r);
      if (r.path == "/api/export.csv") return export_csv();
      if (std::regex_match(r.path, m, draft_re)) return get_draft(m[1].str());
    } else if (r.method == "POST" && std::regex_match(r.path, m, action_re)) {
      if (annotator.empty()) return error_response(400, "X-Annotator-Id header is required", "annotator_id");
      if (m[2] == "claim") return claim(m[1].str(), annotator);
      return annotate(m[1].str(), annotator, r.body);
    }
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
  return error_response(404, "no route for " + r.method + " " + r.path);
}

ServiceResponse ReviewService::list_drafts(const ServiceRequest& r, const std::string& annotator) {
  std::set<TriageStatus> statuses{TriageStatus::top_priority, TriageStatus::low_priority};
  if (auto it = r.query.find("status"); it != r.query.end() && !it->second.empty()) {
    auto s = parse_triage_status(it->second);
    if (!s) return error_response(400, "unknown status \"" + it->second + "\"", "status");
    statuses = {*s};
  }
  std::lock_guard lock(mu_);
  Json out = Json::array();
  for (const auto* c : review_queue(checked_, statuses))
    if (!leased_by_other(c->draft.id, annotator)) out.push_back(to_json(*c));
  return json_response(200, out);
}

ServiceResponse ReviewService::get_draft(const std::string& id) {
  auto it = index_.find(id);
  if (it == index_.end()) return error_response(404, "unknown draft " + id);
  return json_response(200, to_json(checked_[it->second]));
}

ServiceResponse ReviewService::claim(const std::string& id, const std::string& annotator) {
  if (!index_.count(id)) return error_response(404, "unknown draft " + id);
  std::lock_guard lock(mu_);
  if (leased_by_other(id, annotator)) return error_response(409, "draft " + id + " is claimed by another annotator");
  auto expires = opt_.clock() + opt_.lease;
  leases_[id] = {annotator, expires};
  return json_response(200, {{"draft_id", id}, {"annotator_id", annotator}, {"expires_at", epoch_seconds(expires)}});
}

ServiceResponse ReviewService::annotate(const std::string& id, const std::string& annotator, const std::string& body) {
  if (!index_.count(id)) return error_response(404, "unknown draft " + id);
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error&) {
    return error_response(400, "body is not valid JSON");
  }
  if (!j.is_object()) return error_response(400, "body must be a JSON object");
  if (!j.contains("draft_id")) j["draft_id"] = id;
  if (!j.contains("annotator_id")) j["annotator_id"] = annotator;
  AnnotationRecord rec;
  try {
    rec = from_json<AnnotationRecord>(j);
  } catch (const SchemaError& e) {
    return error_response(400, e.what(), e.field());
  }
  if (rec.draft_id != id) return error_response(400, "draft_id does not match the URL", "draft_id");
  if (rec.annotator_id != annotator)
    return error_response(400, "annotator_id does not match X-Annotator-Id", "annotator_id");
  if (auto bad = annotation_invariant_violation(rec))
    return error_response(400, *bad + " is required when is_correct is No", *bad);

  std::lock_guard lock(mu_);
  if (leased_by_other(id, annotator)) return error_response(409, "draft " + id + " is claimed by another annotator");
  append_annotation(journal_, rec);
  records_.push_back(rec);
  if (auto it = leases_.find(id); it != leases_.end() && it->second.annotator == annotator) leases_.erase(it);
  return json_response(201, to_json(rec));
}

ServiceResponse ReviewService::progress() {
  std::lock_guard lock(mu_);
  std::set<std::string> reviewed;
  for (const auto& r : records_) reviewed.insert(r.draft_id);
  Json by_status = Json::object();
  std::size_t total = 0, done = 0;
  for (auto s : {TriageStatus::top_priority, TriageStatus::low_priority}) {
    std::size_t n = 0, k = 0;
    for (const auto& c : checked_) {
      if (c.status != s) continue;
      ++n;
      if (reviewed.count(c.draft.id)) ++k;
    }
    by_status[std::string(to_token(s))] = {{"total", n}, {"reviewed", k}, {"remaining", n - k}};
    total += n;
    done += k;
  }
  return json_response(200, {{"total", total},
                             {"reviewed", done},
                             {"remaining", total - done},
                             {"annotations", records_.size()},
                             {"by_status", by_status}});
}

ServiceResponse ReviewService::agreement(const ServiceRequest& r) {
  std::size_t items = 0;
  if (auto it = r.query.find("items"); it != r.query.end()) {
    auto& v = it->second;
    auto res = std::from_chars(v.data(), v.data() + v.size(), items);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) return error_response(400, "items must be an integer", "items");
  }
  std::lock_guard lock(mu_);
  return json_response(200, annotation_agreement(records_, items).to_json());
}

ServiceResponse ReviewService::export_csv() {
  std::map<std::string, Draft> originals;
  for (const auto& c : checked_) originals.emplace(c.draft.id, c.draft);
  std::lock_guard lock(mu_);
  return {200, "text/csv; charset=utf-8", render_merge_csv(merge_annotations(records_, originals))};
}

struct ReviewServer::Impl {
  explicit Impl(ReviewService& s) : service(s) {}
  ReviewService& service;
  httplib::Server server;
};

ReviewServer::ReviewServer(ReviewService& service) : impl_(std::make_unique<Impl>(service)) {
  auto bridge = [this](const httplib::Request& req, httplib::Response& res) {
    ServiceRequest r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    for (const auto& [k, v] : req.headers) r.headers.emplace(text::fold_case(k), v);
    r.body = req.body;
    auto out = impl_->service.handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  impl_->server.Get(R"(/api/.*)", bridge);
  impl_->server.Post(R"(/api/.*)", bridge);
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(fmt::format("cannot bind {}:{}", host, port));
  return bound;
}

void ReviewServer::listen() {
  if (!impl_->server.listen_after_bind()) throw Error("server stopped with an error");
}

void ReviewServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace instructlr
