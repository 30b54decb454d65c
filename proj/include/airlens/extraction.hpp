#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <variant>

#include "airlens/error.hpp"
#include "airlens/extraction_result.hpp"
#include "airlens/ingest.hpp"
#include "airlens/lexicon.hpp"
#include "airlens/store.hpp"
#include "airlens/taxonomy.hpp"

namespace airlens {

// Highest rating admitted to extraction (the diagnostic band is 1..3 stars).
inline constexpr int kDiagnosticMaxRating = 3;

// Version tag of the response schema documented in docs/provider_protocol.md.
inline constexpr std::string_view kResponseSchema = "airlens-issues/v1";

struct ExtractorConfig {
  std::string endpoint;          // provider URL (live provider only)
  std::string model = "default"; // also used as the extractor_id
  double temperature = 0.0;      // must stay 0
  int max_retries = 2;
  int concurrency_limit = 4;
  std::chrono::seconds timeout{60};

  // Throws Errc::invalid_config.
  void validate() const;
};

struct ProviderRequest {
  std::string review_id;
  std::string prompt;
  int attempt = 1;
  std::string model;
  double temperature = 0.0;
  std::chrono::seconds timeout{60};
};

// Model backend. complete() returns the raw response text. Implementations
// throw Error(Errc::transport) for retryable failures and
// Errc::authentication / Errc::invalid_config / Errc::missing_golden for
// failures that must abort the run. Must be safe to call concurrently.
class ProviderClient {
 public:
  virtual ~ProviderClient() = default;
  virtual std::string complete(const ProviderRequest& request) = 0;
};

struct ValidationError {
  Errc code;
  std::string detail;

  bool operator==(const ValidationError&) const = default;
};

using ParsedResponse = std::variant<ExtractionResult, ValidationError>;

// Byte-deterministic prompt: label catalogue, native-language instruction,
// output schema, empty-list rule and one worked example.
std::string build_prompt(const ReviewRecord& review, const Taxonomy& taxonomy);

// Follow-up prompt after a rejected response.
std::string build_repair_prompt(std::string_view original_prompt, std::string_view rejected_response,
                                const ValidationError& error);

ParsedResponse parse_model_response(std::string_view raw, const Taxonomy& taxonomy, const ReviewRecord& review,
                                    std::string_view extractor_id = {});

// Calls the provider, validating and retrying up to cfg.max_retries times.
// Model-content and transport failures end as status failed; abort-class
// provider errors propagate.
ExtractionResult extract(const ReviewRecord& review, ProviderClient& client, const ExtractorConfig& cfg,
                         const Taxonomy& taxonomy);

struct BatchSummary {
  std::size_t total = 0;
  std::size_t skipped = 0;  // already ok in the store
  std::size_t ok = 0;
  std::size_t failed = 0;
  std::size_t requests = 0;  // provider calls issued by this run

  bool operator==(const BatchSummary&) const = default;
};

// Runs extraction over a diagnostic-filtered dataset with at most
// cfg.concurrency_limit requests in flight, persisting each result as it
// completes and skipping reviews the store already holds as ok.
// Throws Errc::unfiltered_input if any rating exceeds kDiagnosticMaxRating.
BatchSummary extract_batch(const Dataset& ds, ProviderClient& client, const ExtractorConfig& cfg,
                           const Taxonomy& taxonomy, Store& store);

// Same contract with the offline lexicon extractor.
BatchSummary lexicon_batch(const Dataset& ds, const Lexicon& lexicon, Store& store);

}  // namespace airlens
