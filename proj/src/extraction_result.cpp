#include "airlens/extraction_result.hpp"

#include <json.hpp>

#include "airlens/error.hpp"

namespace airlens {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(ExtractionStatus s) noexcept { return s == ExtractionStatus::ok ? "ok" : "failed"; }

ExtractionStatus parse_status(std::string_view s) {
  if (s == "ok") return ExtractionStatus::ok;
  if (s == "failed") return ExtractionStatus::failed;
  throw Error(Errc::malformed_document, "unknown extraction status " + std::string(s));
}

namespace {

ordered_json review_json(const ReviewRecord& r) {
  ordered_json o;
  o["review_id"] = r.review_id;
  o["airline"] = r.airline;
  o["rating"] = r.rating;
  o["title"] = r.title;
  o["body"] = r.body;
  o["language"] = r.language;
  o["review_date"] = r.review_date.to_string();
  o["reviewer_origin"] = r.reviewer_origin;
  o["route_from"] = r.route_from;
  o["route_to"] = r.route_to;
  return o;
}

template <typename T>
T get_field(const json& o, const char* key) {
  auto it = o.find(key);
  if (it == o.end()) throw Error(Errc::malformed_document, std::string("missing field ") + key);
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_document, std::string("bad field ") + key + ": " + e.what());
  }
}

json parse_object(std::string_view text) {
  try {
    auto o = json::parse(text);
    if (!o.is_object()) throw Error(Errc::malformed_document, "expected JSON object");
    return o;
  } catch (const json::parse_error& e) {
    throw Error(Errc::malformed_document, e.what());
  }
}

}  // namespace

std::string encode_review(const ReviewRecord& r) { return review_json(r).dump(); }

ReviewRecord decode_review(std::string_view json_text) {
  const auto o = parse_object(json_text);
  ReviewRecord r;
  r.review_id = get_field<std::string>(o, "review_id");
  r.airline = get_field<std::string>(o, "airline");
  r.rating = get_field<int>(o, "rating");
  r.title = get_field<std::string>(o, "title");
  r.body = get_field<std::string>(o, "body");
  r.language = get_field<std::string>(o, "language");
  auto date = Date::parse(get_field<std::string>(o, "review_date"));
  if (!date) throw Error(Errc::malformed_document, "bad review_date");
  r.review_date = *date;
  r.reviewer_origin = get_field<std::string>(o, "reviewer_origin");
  r.route_from = get_field<std::string>(o, "route_from");
  r.route_to = get_field<std::string>(o, "route_to");
  return r;
}

std::string encode_result(const ExtractionResult& r) {
  ordered_json o;
  o["review_id"] = r.review_id;
  o["extractor_id"] = r.extractor_id;
  o["status"] = to_string(r.status);
  o["attempts"] = r.attempts;
  o["issues"] = ordered_json::array();
  for (const auto& i : r.issues) {
    ordered_json issue;
    issue["label"] = i.label;
    issue["category"] = i.category;
    issue["snippet"] = i.snippet;
    o["issues"].push_back(std::move(issue));
  }
  o["error"] = r.error;
  return o.dump();
}

ExtractionResult decode_result(std::string_view json_text) {
  const auto o = parse_object(json_text);
  ExtractionResult r;
  r.review_id = get_field<std::string>(o, "review_id");
  r.extractor_id = get_field<std::string>(o, "extractor_id");
  r.status = parse_status(get_field<std::string>(o, "status"));
  r.attempts = get_field<int>(o, "attempts");
  if (auto it = o.find("error"); it != o.end() && it->is_string()) r.error = it->get<std::string>();
  const auto issues = o.find("issues");
  if (issues == o.end() || !issues->is_array()) throw Error(Errc::malformed_document, "missing issues array");
  for (const auto& i : *issues) {
    if (!i.is_object()) throw Error(Errc::malformed_document, "issue must be an object");
    ExtractedIssue issue;
    issue.label = get_field<std::string>(i, "label");
    issue.snippet = get_field<std::string>(i, "snippet");
    if (auto c = i.find("category"); c != i.end() && c->is_string()) issue.category = c->get<std::string>();
    r.issues.push_back(std::move(issue));
  }
  return r;
}

}  // namespace airlens
