#include "airlens/error.hpp"

namespace airlens {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::empty_taxonomy: return "empty_taxonomy";
    case Errc::duplicate_label: return "duplicate_label";
    case Errc::alias_collision: return "alias_collision";
    case Errc::unknown_category_reference: return "unknown_category_reference";
    case Errc::category_count_mismatch: return "category_count_mismatch";
    case Errc::unknown_label: return "unknown_label";
    case Errc::unknown_category: return "unknown_category";
    case Errc::empty_label: return "empty_label";
    case Errc::malformed_document: return "malformed_document";
    case Errc::undecodable_stream: return "undecodable_stream";
    case Errc::unknown_format: return "unknown_format";
    case Errc::malformed_header: return "malformed_header";
    case Errc::invalid_rating_band: return "invalid_rating_band";
    case Errc::inverted_range: return "inverted_range";
    case Errc::malformed_structure: return "malformed_structure";
    case Errc::unmapped_label: return "unmapped_label";
    case Errc::snippet_mismatch: return "snippet_mismatch";
    case Errc::empty_snippet: return "empty_snippet";
    case Errc::snippet_too_short: return "snippet_too_short";
    case Errc::unfiltered_input: return "unfiltered_input";
    case Errc::invalid_config: return "invalid_config";
    case Errc::transport: return "transport";
    case Errc::authentication: return "authentication";
    case Errc::missing_golden: return "missing_golden";
    case Errc::duplicate_phrase: return "duplicate_phrase";
    case Errc::unknown_region: return "unknown_region";
    case Errc::lock_held: return "lock_held";
    case Errc::corrupt_store: return "corrupt_store";
    case Errc::dangling_reference: return "dangling_reference";
    case Errc::read_only: return "read_only";
    case Errc::io: return "io";
    case Errc::granularity_mismatch: return "granularity_mismatch";
  }
  return "unknown";
}

}  // namespace airlens
