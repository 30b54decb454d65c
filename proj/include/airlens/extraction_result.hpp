#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "airlens/ingest.hpp"

namespace airlens {

struct ExtractedIssue {
  std::string label;     // IssueLabel id
  std::string snippet;   // verbatim evidence from the review body (NFC)
  std::string category;  // MacroCategory id of `label`

  bool operator==(const ExtractedIssue&) const = default;
};

enum class ExtractionStatus { ok, failed };

std::string_view to_string(ExtractionStatus s) noexcept;
ExtractionStatus parse_status(std::string_view s);

struct ExtractionResult {
  std::string review_id;
  std::vector<ExtractedIssue> issues;  // at most one entry per label
  std::string extractor_id;            // model identifier or "lexicon:vN"
  ExtractionStatus status = ExtractionStatus::ok;
  int attempts = 1;
  std::string error;  // last validation/transport error for failed results

  bool operator==(const ExtractionResult&) const = default;
};

// A review joined with one of its extraction results.
struct ExtractedReview {
  ReviewRecord review;
  ExtractionResult result;

  bool operator==(const ExtractedReview&) const = default;
};

// One-line JSON encodings used by the store segments and result bundles.
std::string encode_review(const ReviewRecord& r);
ReviewRecord decode_review(std::string_view json_text);
std::string encode_result(const ExtractionResult& r);
ExtractionResult decode_result(std::string_view json_text);

}  // namespace airlens
