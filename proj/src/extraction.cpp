#include "airlens/extraction.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "airlens/text.hpp"

namespace airlens {

using nlohmann::json;

namespace {

constexpr std::string_view kExampleReview =
    "Finally arrived in Cairo. The flight was delayed by 3 hours with zero updates from the gate agents. Once "
    "onboard, the seat would not recline, and the food was completely cold.";

constexpr std::string_view kExampleAnswer =
    R"([{"label": "Poor Communication Regarding Delay", "snippet": "delayed by 3 hours with zero updates from the gate agents"}, )"
    R"({"label": "Broken Seats", "snippet": "the seat would not recline"}, )"
    R"({"label": "Poor Food Quality", "snippet": "the food was completely cold"}])";

// Tolerates one surrounding Markdown code fence, nothing else.
std::string_view strip_fence(std::string_view s) {
  s = text::trim(s);
  if (s.substr(0, 3) != "```") return s;
  const auto first_nl = s.find('\n');
  if (first_nl == std::string_view::npos || s.size() < 6 || s.substr(s.size() - 3) != "```") return s;
  return text::trim(s.substr(first_nl + 1, s.size() - 3 - (first_nl + 1)));
}

class CountingClient final : public ProviderClient {
 public:
  explicit CountingClient(ProviderClient& inner) : inner_(inner) {}

  std::string complete(const ProviderRequest& request) override {
    ++count_;
    return inner_.complete(request);
  }

  std::size_t count() const noexcept { return count_.load(); }

 private:
  ProviderClient& inner_;
  std::atomic<std::size_t> count_{0};
};

void require_filtered(const Dataset& ds) {
  for (const auto& r : ds.records) {
    if (r.rating > kDiagnosticMaxRating) {
      throw Error(Errc::unfiltered_input,
                  fmt::format("review {} has rating {}; apply the diagnostic filter first", r.review_id, r.rating));
    }
  }
}

std::vector<const ReviewRecord*> pending_reviews(const Dataset& ds, const std::set<std::string>& done) {
  std::vector<const ReviewRecord*> pending;
  std::set<std::string> queued;
  for (const auto& r : ds.records) {
    if (done.contains(r.review_id) || !queued.insert(r.review_id).second) continue;
    pending.push_back(&r);
  }
  return pending;
}

}  // namespace

void ExtractorConfig::validate() const {
  if (temperature != 0.0) throw Error(Errc::invalid_config, "temperature must be 0");
  if (concurrency_limit < 1) throw Error(Errc::invalid_config, "concurrency_limit must be >= 1");
  if (max_retries < 0) throw Error(Errc::invalid_config, "max_retries must be >= 0");
  if (model.empty()) throw Error(Errc::invalid_config, "model identifier must be set");
  if (timeout.count() <= 0) throw Error(Errc::invalid_config, "timeout must be positive");
}

std::string build_prompt(const ReviewRecord& review, const Taxonomy& taxonomy) {
  std::string p;
  p += "You are auditing airline passenger reviews for service failures.\n\n";
  p += "Identify every service issue from the catalogue below that the review describes. ";
  p += fmt::format("Read the review in its original language ({}). ", review.language);
  p += "Do not translate the review and do not translate the passages you copy from it.\n\n";

  p += "Issue catalogue (label | issue | category):\n";
  for (const auto& label : taxonomy.labels()) {
    p += fmt::format("- {} | {} | {}\n", label.id, label.display_name, taxonomy.category(label.category).display_name);
  }

  p += "\nOutput rules:\n";
  p += "1. Reply with a JSON array only, no commentary.\n";
  p += "2. Each element is an object with exactly two string fields: \"label\" (a label or issue name from the "
       "catalogue) and \"snippet\" (a passage copied character for character from the review that shows the "
       "issue).\n";
  p += "3. One element per distinct issue. Never repeat an issue.\n";
  p += "4. If the review describes none of the catalogued issues, reply with [].\n\n";

  p += "Worked example\nReview:\n";
  p += kExampleReview;
  p += "\nAnswer:\n";
  p += kExampleAnswer;
  p += "\n\n";

  p += fmt::format("Review to analyse (language: {}):\n<<<\n{}\n>>>\n", review.language, review.body);
  return p;
}

std::string build_repair_prompt(std::string_view original_prompt, std::string_view rejected_response,
                                const ValidationError& error) {
  return fmt::format(
      "{}\nYour previous answer was:\n{}\n\nIt was rejected ({}): {}\n"
      "Reply again with only the corrected JSON array, following the output rules above.\n",
      original_prompt, rejected_response, to_string(error.code), error.detail);
}

ParsedResponse parse_model_response(std::string_view raw, const Taxonomy& taxonomy, const ReviewRecord& review,
                                    std::string_view extractor_id) {
  json doc;
  try {
    doc = json::parse(strip_fence(raw));
  } catch (const json::parse_error& e) {
    return ValidationError{Errc::malformed_structure, e.what()};
  }
  if (!doc.is_array()) return ValidationError{Errc::malformed_structure, "top level must be a JSON array"};

  const auto body = text::nfc(review.body);
  ExtractionResult result;
  result.review_id = review.review_id;
  result.extractor_id = std::string(extractor_id);
  result.status = ExtractionStatus::ok;

  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& entry = doc[i];
    if (!entry.is_object() || entry.size() != 2 || !entry.contains("label") || !entry.contains("snippet") ||
        !entry["label"].is_string() || !entry["snippet"].is_string()) {
      return ValidationError{Errc::malformed_structure,
                             fmt::format("element {} must be {{\"label\": string, \"snippet\": string}}", i)};
    }
    const auto raw_label = entry["label"].get<std::string>();
    const auto raw_snippet = entry["snippet"].get<std::string>();

    LabelResolution resolved = Unmatched{};
    try {
      resolved = taxonomy.resolve_label(raw_label);
    } catch (const Error&) {
      return ValidationError{Errc::malformed_structure, fmt::format("element {} has a blank label", i)};
    }
    if (std::holds_alternative<Unmatched>(resolved)) {
      return ValidationError{Errc::unmapped_label, raw_label};
    }
    const auto& label = std::get<IssueLabel>(resolved);

    if (text::trim(raw_snippet).empty()) return ValidationError{Errc::empty_snippet, label.id};
    auto snippet = text::nfc(raw_snippet);
    if (text::code_point_count(snippet) < 3) return ValidationError{Errc::snippet_too_short, label.id};
    if (body.find(snippet) == std::string::npos) return ValidationError{Errc::snippet_mismatch, label.id};

    if (!seen.insert(label.id).second) continue;
    result.issues.push_back({label.id, std::move(snippet), label.category});
  }
  return result;
}

ExtractionResult extract(const ReviewRecord& review, ProviderClient& client, const ExtractorConfig& cfg,
                         const Taxonomy& taxonomy) {
  cfg.validate();
  const auto prompt = build_prompt(review, taxonomy);
  std::string current = prompt;
  ValidationError last{Errc::malformed_structure, "no attempt made"};
  const int max_attempts = cfg.max_retries + 1;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    std::string raw;
    try {
      raw = client.complete({review.review_id, current, attempt, cfg.model, cfg.temperature, cfg.timeout});
    } catch (const Error& e) {
      if (e.code() != Errc::transport) throw;
      last = {Errc::transport, e.what()};
      current = prompt;
      continue;
    }
    auto parsed = parse_model_response(raw, taxonomy, review, cfg.model);
    if (auto* ok = std::get_if<ExtractionResult>(&parsed)) {
      ok->attempts = attempt;
      return std::move(*ok);
    }
    last = std::get<ValidationError>(parsed);
    current = build_repair_prompt(prompt, raw, last);
  }
  ExtractionResult failed;
  failed.review_id = review.review_id;
  failed.extractor_id = cfg.model;
  failed.status = ExtractionStatus::failed;
  failed.attempts = max_attempts;
  failed.error = fmt::format("{}: {}", to_string(last.code), last.detail);
  return failed;
}

BatchSummary extract_batch(const Dataset& ds, ProviderClient& client, const ExtractorConfig& cfg,
                           const Taxonomy& taxonomy, Store& store) {
  require_filtered(ds);
  cfg.validate();

  const auto pending = pending_reviews(ds, store.checkpoint_state(cfg.model));
  BatchSummary summary;
  summary.total = ds.size();
  summary.skipped = ds.size() - pending.size();

  CountingClient counting(client);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> ok{0};
  std::atomic<std::size_t> failed{0};
  std::atomic<bool> abort{false};
  std::mutex error_mu;
  std::exception_ptr first_error;

  auto worker = [&] {
    while (!abort.load()) {
      const auto i = next.fetch_add(1);
      if (i >= pending.size()) break;
      try {
        auto result = extract(*pending[i], counting, cfg, taxonomy);
        store.put_extraction(result);
        (result.status == ExtractionStatus::ok ? ok : failed).fetch_add(1);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        abort.store(true);
      }
    }
  };

  {
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.concurrency_limit), pending.size());
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  summary.ok = ok.load();
  summary.failed = failed.load();
  summary.requests = counting.count();
  return summary;
}

BatchSummary lexicon_batch(const Dataset& ds, const Lexicon& lexicon, Store& store) {
  require_filtered(ds);
  const auto pending = pending_reviews(ds, store.checkpoint_state(lexicon.extractor_id()));
  BatchSummary summary;
  summary.total = ds.size();
  summary.skipped = ds.size() - pending.size();
  std::vector<ExtractionResult> results;
  results.reserve(pending.size());
  for (const auto* review : pending) results.push_back(lexicon_extract(*review, lexicon));
  store.put_extractions(results);
  summary.ok = results.size();
  return summary;
}

}  // namespace airlens
