#include "airlens/analytics.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

#include "airlens/error.hpp"

namespace airlens {

namespace {

// Distinct label sets per review over ok results, validated against the taxonomy.
struct ReviewMentions {
  Date date;
  std::set<std::string> labels;
};

std::map<std::string, ReviewMentions> collect_mentions(std::span<const ExtractedReview> results,
                                                       const Taxonomy& taxonomy,
                                                       const std::optional<DateRange>& window) {
  std::map<std::string, ReviewMentions> out;
  for (const auto& item : results) {
    if (item.result.status != ExtractionStatus::ok) continue;
    if (window && !window->contains(item.review.review_date)) continue;
    auto& entry = out[item.review.review_id];
    entry.date = item.review.review_date;
    for (const auto& issue : item.result.issues) {
      if (!taxonomy.has_label(issue.label)) throw Error(Errc::unknown_label, issue.label);
      entry.labels.insert(issue.label);
    }
  }
  return out;
}

TimeSeries bucketize(const Dataset& ds, Granularity g, bool with_mean) {
  TimeSeries series;
  series.granularity = g;
  if (ds.empty()) return series;
  std::map<PeriodBucket, std::pair<std::int64_t, std::int64_t>> acc;
  for (const auto& r : ds.records) {
    auto& [count, sum] = acc[PeriodBucket::of(r.review_date, g)];
    ++count;
    sum += r.rating;
  }
  const auto last = acc.rbegin()->first;
  for (auto b = acc.begin()->first; b <= last; b = b.next()) {
    TimeSeriesPoint p;
    p.bucket = b;
    if (auto it = acc.find(b); it != acc.end()) {
      p.count = it->second.first;
      p.rating_sum = it->second.second;
    }
    if (with_mean && p.count > 0) {
      p.mean_rating = static_cast<double>(p.rating_sum) / static_cast<double>(p.count);
    }
    if (!with_mean) p.rating_sum = 0;
    series.points.push_back(p);
  }
  return series;
}

}  // namespace

Granularity parse_granularity(std::string_view s) {
  if (s == "year" || s == "yearly") return Granularity::year;
  if (s == "quarter" || s == "quarterly") return Granularity::quarter;
  throw Error(Errc::invalid_config, "unknown granularity " + std::string(s));
}

std::string_view to_string(Granularity g) noexcept { return g == Granularity::year ? "year" : "quarter"; }

PeriodBucket PeriodBucket::of(const Date& d, Granularity g) noexcept {
  return {g, d.year, g == Granularity::quarter ? d.quarter() : 0};
}

PeriodBucket PeriodBucket::next() const noexcept {
  if (granularity == Granularity::year) return {granularity, year + 1, 0};
  if (quarter == 4) return {granularity, year + 1, 1};
  return {granularity, year, quarter + 1};
}

std::string PeriodBucket::key() const {
  if (granularity == Granularity::year) return std::to_string(year);
  return fmt::format("{}-Q{}", year, quarter);
}

TimeSeries rating_trajectory(const Dataset& ds, Granularity g) { return bucketize(ds, g, true); }

TimeSeries review_frequency(const Dataset& ds, Granularity g) { return bucketize(ds, g, false); }

IssueFrequencyTable issue_frequency(std::span<const ExtractedReview> results, const Taxonomy& taxonomy,
                                    const std::optional<DateRange>& window) {
  IssueFrequencyTable table;
  table.window = window;
  std::map<std::string, std::int64_t> per_label;
  for (const auto& [id, mentions] : collect_mentions(results, taxonomy, window)) {
    for (const auto& label : mentions.labels) ++per_label[label];
  }
  std::map<std::string, std::int64_t> per_category;
  for (const auto& [label, count] : per_label) {
    const auto& category = taxonomy.label(label).category;
    table.rows.push_back({label, category, count});
    per_category[category] += count;
    table.total += count;
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
    return a.count != b.count ? a.count > b.count : a.label < b.label;
  });
  for (const auto& [category, count] : per_category) table.category_totals.push_back({category, count});
  std::sort(table.category_totals.begin(), table.category_totals.end(), [](const auto& a, const auto& b) {
    return a.count != b.count ? a.count > b.count : a.category < b.category;
  });
  return table;
}

std::vector<RegionAggregate> region_segmentation(const Dataset& ds, const RegionMap& map) {
  std::map<std::string, RegionAggregate> acc;
  for (const auto& r : ds.records) {
    auto region = map.assign(r.reviewer_origin);
    auto& agg = acc[region];
    agg.region = std::move(region);
    ++agg.count;
    agg.rating_sum += r.rating;
  }
  std::vector<RegionAggregate> out;
  for (auto& [id, agg] : acc) {
    agg.mean_rating = static_cast<double>(agg.rating_sum) / static_cast<double>(agg.count);
    out.push_back(agg);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.mean_rating != b.mean_rating ? a.mean_rating < b.mean_rating : a.region < b.region;
  });
  return out;
}

ThemeEvolutionSeries theme_evolution(std::span<const ExtractedReview> results, const Taxonomy& taxonomy,
                                     Granularity g) {
  ThemeEvolutionSeries out;
  const auto mentions = collect_mentions(results, taxonomy, std::nullopt);
  for (const auto& c : taxonomy.categories()) out.series.push_back({c.id, {}});
  if (mentions.empty()) return out;

  std::map<std::pair<PeriodBucket, std::string>, std::int64_t> acc;
  auto first = PeriodBucket::of(mentions.begin()->second.date, g);
  auto last = first;
  for (const auto& [id, m] : mentions) {
    const auto b = PeriodBucket::of(m.date, g);
    first = std::min(first, b);
    last = std::max(last, b);
    for (const auto& label : m.labels) ++acc[{b, taxonomy.label(label).category}];
  }
  for (auto b = first; b <= last; b = b.next()) out.buckets.push_back(b);
  out.totals.assign(out.buckets.size(), 0);
  for (auto& s : out.series) {
    s.counts.reserve(out.buckets.size());
    for (std::size_t i = 0; i < out.buckets.size(); ++i) {
      auto it = acc.find({out.buckets[i], s.category});
      const auto n = it == acc.end() ? 0 : it->second;
      s.counts.push_back(n);
      out.totals[i] += n;
    }
  }
  return out;
}

GapSeries compare_airlines(const TimeSeries& a, const TimeSeries& b) {
  if (a.granularity != b.granularity) {
    throw Error(Errc::granularity_mismatch,
                fmt::format("{} vs {}", to_string(a.granularity), to_string(b.granularity)));
  }
  GapSeries out;
  out.granularity = a.granularity;
  std::map<PeriodBucket, std::pair<std::optional<double>, std::optional<double>>> joined;
  for (const auto& p : a.points) joined[p.bucket].first = p.mean_rating;
  for (const auto& p : b.points) joined[p.bucket].second = p.mean_rating;
  for (const auto& [bucket, means] : joined) {
    if (means.first && means.second) {
      out.points.push_back({bucket, *means.first - *means.second});
    } else {
      out.skipped.push_back(bucket);
    }
  }
  return out;
}

std::int64_t CoOccurrenceMatrix::at(std::string_view a, std::string_view b) const {
  auto index = [&](std::string_view id) {
    auto it = std::lower_bound(labels.begin(), labels.end(), id);
    if (it == labels.end() || *it != id) throw Error(Errc::unknown_label, std::string(id));
    return static_cast<std::size_t>(it - labels.begin());
  };
  return at(index(a), index(b));
}

CoOccurrenceMatrix co_occurrence(std::span<const ExtractedReview> results, const Taxonomy& taxonomy) {
  CoOccurrenceMatrix m;
  for (const auto& l : taxonomy.labels()) m.labels.push_back(l.id);
  std::sort(m.labels.begin(), m.labels.end());
  const auto n = m.labels.size();
  m.counts.assign(n * n, 0);
  for (const auto& [id, mentions] : collect_mentions(results, taxonomy, std::nullopt)) {
    std::vector<std::size_t> idx;
    for (const auto& label : mentions.labels) {
      idx.push_back(static_cast<std::size_t>(std::lower_bound(m.labels.begin(), m.labels.end(), label) -
                                             m.labels.begin()));
    }
    for (auto i : idx) {
      for (auto j : idx) ++m.counts[i * n + j];
    }
  }
  return m;
}

}  // namespace airlens
