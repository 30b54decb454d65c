#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "airlens/date.hpp"

namespace airlens {

struct ReviewRecord {
  std::string review_id;
  std::string airline;  // lowercase carrier tag, e.g. "egyptair"
  int rating = 0;       // 1..5 stars
  std::string title;
  std::string body;
  std::string language;  // lowercase BCP-47 tag
  Date review_date;
  std::string reviewer_origin;  // raw location text, may be empty
  std::string route_from;       // IATA code or empty
  std::string route_to;

  bool operator==(const ReviewRecord&) const = default;
};

struct Provenance {
  std::vector<std::string> sources;
  std::string loaded_at;  // UTC, ISO-8601
  std::map<std::string, std::size_t> airline_counts;
};

struct Dataset {
  std::vector<ReviewRecord> records;
  Provenance provenance;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
};

// Builds a dataset and fills in per-airline provenance counts.
Dataset make_dataset(std::vector<ReviewRecord> records, std::vector<std::string> sources = {});

enum class Format { jsonl, csv };

Format parse_format(std::string_view tag);
std::string_view to_string(Format f) noexcept;

struct Reject {
  std::string source;
  std::size_t line = 0;  // 1-based physical line where the row starts
  std::string reason;    // reject code, e.g. "rating_out_of_range"
  std::string field;     // offending field, empty for whole-row problems
  std::string detail;

  bool operator==(const Reject&) const = default;
};

struct RejectReport {
  std::vector<Reject> rejects;

  bool empty() const noexcept { return rejects.empty(); }
  std::size_t size() const noexcept { return rejects.size(); }
};

struct ParseOptions {
  DateRange window{kCorpusStart, kCorpusEnd};
  std::string source_name = "<stream>";
};

struct ParseOutcome {
  Dataset dataset;
  RejectReport rejects;
};

// Parses a JSONL or CSV export. Invalid rows are rejected with a reason and
// never dropped silently. Throws Errc::undecodable_stream for non-UTF-8 input
// and Errc::malformed_header for a CSV header missing required columns.
ParseOutcome parse_dataset(std::string_view data, Format format, const ParseOptions& options = {});

// Parses several files (concurrently) and merges them in lexicographic path
// order. Throws Errc::io for unreadable paths.
ParseOutcome parse_files(std::vector<std::filesystem::path> paths, Format format, const ParseOptions& options = {});

// Canonical serialization; parse_dataset(serialize_dataset(d, f), f) yields
// the same records.
std::string serialize_dataset(const Dataset& ds, Format format);

std::string reject_report_jsonl(const RejectReport& report);

// Synthesized id for rows that arrive without one: a content hash of
// (airline, review_date, body).
std::string content_review_id(std::string_view airline, const Date& date, std::string_view body);

// Keeps the first occurrence of each review_id. Returns the number dropped.
std::pair<Dataset, std::size_t> deduplicate(const Dataset& ds);

// Keeps ratings <= max_rating, order preserved. Throws
// Errc::invalid_rating_band unless 1 <= max_rating <= 5.
Dataset diagnostic_filter(const Dataset& ds, int max_rating = 3);

// Inclusive on both ends. Throws Errc::inverted_range when from > to.
Dataset window_filter(const Dataset& ds, const Date& from, const Date& to);

struct DatasetStats {
  std::size_t total = 0;
  std::map<std::string, std::size_t> per_airline;
  std::map<std::string, std::size_t> per_language;
  std::map<int, std::size_t> per_year;
  std::array<std::size_t, 5> rating_histogram{};  // index 0 is 1 star

  bool operator==(const DatasetStats&) const = default;
};

DatasetStats dataset_stats(const Dataset& ds);

}  // namespace airlens
