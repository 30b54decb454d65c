#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "airlens/date.hpp"
#include "airlens/error.hpp"
#include "airlens/extraction_result.hpp"
#include "airlens/ingest.hpp"
#include "airlens/region_map.hpp"
#include "airlens/taxonomy.hpp"

namespace airlens {

enum class Granularity { year, quarter };

Granularity parse_granularity(std::string_view s);  // Errc::invalid_config
std::string_view to_string(Granularity g) noexcept;

struct PeriodBucket {
  Granularity granularity = Granularity::year;
  int year = 0;
  int quarter = 0;  // 1..4 for quarterly buckets, 0 for yearly

  static PeriodBucket of(const Date& d, Granularity g) noexcept;
  PeriodBucket next() const noexcept;
  std::string key() const;  // "2019" or "2024-Q3"

  auto operator<=>(const PeriodBucket&) const = default;
};

struct TimeSeriesPoint {
  PeriodBucket bucket;
  std::int64_t count = 0;
  std::int64_t rating_sum = 0;
  std::optional<double> mean_rating;  // only when count > 0

  bool operator==(const TimeSeriesPoint&) const = default;
};

// Contiguous buckets from the first to the last populated one.
struct TimeSeries {
  Granularity granularity = Granularity::year;
  std::vector<TimeSeriesPoint> points;

  bool operator==(const TimeSeries&) const = default;
};

TimeSeries rating_trajectory(const Dataset& ds, Granularity g);
// Counts only; mean_rating stays empty.
TimeSeries review_frequency(const Dataset& ds, Granularity g);

struct IssueFrequencyRow {
  std::string label;
  std::string category;
  std::int64_t count = 0;

  bool operator==(const IssueFrequencyRow&) const = default;
};

struct CategoryTotal {
  std::string category;
  std::int64_t count = 0;

  bool operator==(const CategoryTotal&) const = default;
};

struct IssueFrequencyTable {
  std::vector<IssueFrequencyRow> rows;            // count desc, label id asc
  std::vector<CategoryTotal> category_totals;     // count desc, category id asc
  std::optional<DateRange> window;
  std::int64_t total = 0;
};

// Counts distinct (review, label) pairs over ok results inside the window.
// Labels outside the taxonomy raise Errc::unknown_label.
IssueFrequencyTable issue_frequency(std::span<const ExtractedReview> results, const Taxonomy& taxonomy,
                                    const std::optional<DateRange>& window = std::nullopt);

struct RegionAggregate {
  std::string region;
  std::int64_t count = 0;
  std::int64_t rating_sum = 0;
  double mean_rating = 0.0;

  bool operator==(const RegionAggregate&) const = default;
};

// One aggregate per populated region, sorted by mean rating asc (ties by id).
std::vector<RegionAggregate> region_segmentation(const Dataset& ds, const RegionMap& map);

struct ThemeSeries {
  std::string category;
  std::vector<std::int64_t> counts;  // aligned with ThemeEvolutionSeries::buckets

  bool operator==(const ThemeSeries&) const = default;
};

struct ThemeEvolutionSeries {
  std::vector<PeriodBucket> buckets;
  std::vector<ThemeSeries> series;   // every taxonomy category, id order
  std::vector<std::int64_t> totals;  // per bucket, equals the column sum
};

// Mentions (distinct review/label pairs) per category per period.
ThemeEvolutionSeries theme_evolution(std::span<const ExtractedReview> results, const Taxonomy& taxonomy,
                                     Granularity g = Granularity::year);

struct GapPoint {
  PeriodBucket bucket;
  double gap = 0.0;  // a.mean - b.mean

  bool operator==(const GapPoint&) const = default;
};

struct GapSeries {
  Granularity granularity = Granularity::year;
  std::vector<GapPoint> points;
  std::vector<PeriodBucket> skipped;  // buckets lacking a mean on either side
};

GapSeries compare_airlines(const TimeSeries& a, const TimeSeries& b);

struct CoOccurrenceMatrix {
  std::vector<std::string> labels;  // taxonomy label ids, sorted
  std::vector<std::int64_t> counts; // row-major labels.size()^2

  std::size_t size() const noexcept { return labels.size(); }
  std::int64_t at(std::size_t i, std::size_t j) const { return counts.at(i * labels.size() + j); }
  std::int64_t at(std::string_view a, std::string_view b) const;
};

CoOccurrenceMatrix co_occurrence(std::span<const ExtractedReview> results, const Taxonomy& taxonomy);

}  // namespace airlens
