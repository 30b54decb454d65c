#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "airlens/error.hpp"
#include "airlens/date.hpp"
#include "airlens/extraction_result.hpp"
#include "airlens/ingest.hpp"

namespace airlens {

enum class StoreMode { read_only, read_write };

struct StoreOptions {
  bool sync = true;                   // fsync segments and manifest on commit
  std::size_t compact_threshold = 64; // merge segments once more than this many are live
};

// All fields optional and conjunctive; a default Query matches everything.
struct Query {
  std::optional<std::string> airline;
  std::optional<DateRange> dates;
  std::optional<ExtractionStatus> status;
  std::optional<std::string> label;
  std::optional<std::string> category;
  std::optional<std::string> extractor_id;
};

struct VerifyReport {
  bool ok = true;
  std::size_t segments = 0;
  std::size_t records = 0;
  std::size_t reviews = 0;
  std::size_t extractions = 0;
  std::vector<std::string> problems;
  std::vector<std::string> orphans;  // uncommitted files present on disk
};

// Durable review/extraction store: immutable segment files listed in an
// atomically replaced MANIFEST. One writer per root (flock on LOCK); readers
// see the last committed manifest. See docs/store_layout.md.
class Store {
 public:
  static Store open(const std::filesystem::path& root, StoreMode mode, StoreOptions options = {});

  Store(Store&&) noexcept;
  Store& operator=(Store&&) noexcept;
  ~Store();

  const std::filesystem::path& root() const noexcept;
  StoreMode mode() const noexcept;

  // Upsert by review_id. Returns the number of new or changed records;
  // identical re-puts write nothing.
  std::size_t put_reviews(const Dataset& ds);

  // One result per (review_id, extractor_id); an ok result is never replaced
  // by a failed one. Throws Errc::dangling_reference for unknown reviews.
  void put_extraction(const ExtractionResult& result);
  std::size_t put_extractions(std::span<const ExtractionResult> results);

  // Ordered by (review_date, review_id, extractor_id).
  std::vector<ExtractedReview> query_extractions(const Query& q = {}) const;

  // Review ids holding an ok result (for one extractor, or any).
  std::set<std::string> checkpoint_state(const std::optional<std::string>& extractor_id = std::nullopt) const;

  // All reviews ordered by (review_date, review_id).
  Dataset reviews() const;
  std::optional<ReviewRecord> review(const std::string& review_id) const;
  std::size_t review_count() const;
  std::size_t extraction_count() const;

  // SHA-256 of the committed manifest; identifies the store content.
  std::string state_digest() const;

  // Recomputes every committed segment's size, hash and record count.
  VerifyReport verify() const;

 private:
  struct Impl;
  explicit Store(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

VerifyReport verify_store(const std::filesystem::path& root);

}  // namespace airlens
