#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "airlens/error.hpp"
#include "airlens/analytics.hpp"
#include "airlens/ingest.hpp"
#include "airlens/taxonomy.hpp"

namespace airlens {

// Null cells render as an empty CSV/Markdown field and as JSON null.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  bool operator==(const Table&) const = default;
};

enum class TableFormat { csv, markdown, json };

TableFormat parse_table_format(std::string_view s);  // Errc::unknown_format
std::string_view to_string(TableFormat f) noexcept;
std::string_view file_extension(TableFormat f) noexcept;

// CSV: RFC 4180, LF line ends, quoting only where needed. Markdown: GFM pipe
// table. JSON: {"columns": [...], "rows": [[...], ...]}. Reals use the
// shortest round-trip representation.
std::string emit_table(const Table& table, TableFormat format);
std::string render_cell(const Cell& cell);

Table frequency_table(const IssueFrequencyTable& t);
Table category_totals_table(const IssueFrequencyTable& t, const Taxonomy& taxonomy);
Table trajectory_table(const std::map<std::string, TimeSeries>& per_airline);
Table volume_table(const std::map<std::string, TimeSeries>& per_airline);
Table region_table(const std::map<std::string, std::vector<RegionAggregate>>& per_airline);
Table themes_table(const ThemeEvolutionSeries& s);
Table compare_table(const GapSeries& g);
Table cooccurrence_table(const CoOccurrenceMatrix& m);
Table dataset_stats_table(const DatasetStats& s);

enum class PlotKind { line, stacked_area, bar, region_bar };

std::string_view to_string(PlotKind k) noexcept;

struct PlotPoint {
  std::string x;
  std::optional<double> y;  // empty for undefined values
  std::optional<std::int64_t> n;  // supporting count, when meaningful

  bool operator==(const PlotPoint&) const = default;
};

struct PlotSeries {
  std::string name;
  std::vector<PlotPoint> points;

  bool operator==(const PlotSeries&) const = default;
};

struct PlotAxis {
  std::string label;
  std::string scale;  // "category", "linear"
  std::optional<double> min;
  std::optional<double> max;

  bool operator==(const PlotAxis&) const = default;
};

struct PlotDocument {
  PlotKind kind = PlotKind::line;
  std::string title;
  std::string source;  // producing aggregate, e.g. "rating_trajectory"
  PlotAxis x_axis;
  PlotAxis y_axis;
  std::vector<PlotSeries> series;
  std::string run_id;

  // stacked_area series share one x sequence; bar kinds hold one series.
  bool consistent() const;
};

PlotDocument trajectory_plot(const std::map<std::string, TimeSeries>& per_airline);
PlotDocument volume_plot(const std::map<std::string, TimeSeries>& per_airline);
PlotDocument frequency_plot(const IssueFrequencyTable& t);
PlotDocument themes_plot(const ThemeEvolutionSeries& s);
PlotDocument region_plot(const std::string& airline, const std::vector<RegionAggregate>& aggregates);
PlotDocument compare_plot(const GapSeries& g, const std::string& a, const std::string& b);

std::string emit_plot(const PlotDocument& doc);
// Minimal static SVG rendering; empty when the document cannot be drawn.
std::string render_svg(const PlotDocument& doc);

struct InputDigest {
  std::string name;    // role, e.g. "store", "taxonomy"
  std::string path;
  std::string sha256;

  bool operator==(const InputDigest&) const = default;
};

struct ArtifactDigest {
  std::string path;  // relative to the output directory
  std::string sha256;

  bool operator==(const ArtifactDigest&) const = default;
};

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::vector<InputDigest> inputs;
  std::string taxonomy_version;
  std::string extractor_id;
  std::vector<ArtifactDigest> artifacts;
  std::map<std::string, std::string> summary;
  std::string started_at;
  std::string finished_at;

  // Content identifier: hash of command, config, input digests, taxonomy
  // version and extractor id. Independent of paths and timestamps.
  std::string run_id() const;
};

std::string emit_manifest(const RunManifest& m);
std::string utc_timestamp();

}  // namespace airlens
