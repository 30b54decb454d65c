#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace airlens {

// Stable, machine-readable failure codes. The string form (to_string) is part
// of the reject-report and CLI output contract.
enum class Errc {
  // taxonomy
  empty_taxonomy,
  duplicate_label,
  alias_collision,
  unknown_category_reference,
  category_count_mismatch,
  unknown_label,
  unknown_category,
  empty_label,
  // documents and streams
  malformed_document,
  undecodable_stream,
  unknown_format,
  malformed_header,
  // ingest filters
  invalid_rating_band,
  inverted_range,
  // extraction
  malformed_structure,
  unmapped_label,
  snippet_mismatch,
  empty_snippet,
  snippet_too_short,
  unfiltered_input,
  invalid_config,
  transport,
  authentication,
  missing_golden,
  // lexicon / region map
  duplicate_phrase,
  unknown_region,
  // store
  lock_held,
  corrupt_store,
  dangling_reference,
  read_only,
  io,
  // analytics
  granularity_mismatch,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace airlens
