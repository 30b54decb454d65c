#include <gtest/gtest.h>

#include <json.hpp>
#include <random>

#include "airlens/report.hpp"
#include "airlens/taxonomy.hpp"
#include "support.hpp"

using namespace airlens;
using namespace airlens::testing;
using nlohmann::json;

namespace {

// Minimal RFC 4180 reader for round-trip checks.
std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (any || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

Table sample_table() {
  Table t;
  t.columns = {"name", "count", "mean"};
  t.rows.push_back({std::string("a, \"quoted\""), std::int64_t{3}, 2.5});
  t.rows.push_back({std::string("multi\nline"), std::int64_t{0}, std::monostate{}});
  return t;
}

}  // namespace

TEST(EmitTable, EmptyTableIsHeaderOnly) {
  Table t;
  t.columns = {"label", "category", "count"};
  EXPECT_EQ(emit_table(t, TableFormat::csv), "label,category,count\n");
  const auto doc = json::parse(emit_table(t, TableFormat::json));
  EXPECT_EQ(doc["columns"].size(), 3u);
  EXPECT_TRUE(doc["rows"].empty());
}

TEST(EmitTable, TwoRowsGiveThreeCsvRecords) {
  Table t;
  t.columns = {"label", "count"};
  t.rows = {{std::string("x"), std::int64_t{1}}, {std::string("y"), std::int64_t{2}}};
  const auto csv = emit_table(t, TableFormat::csv);
  EXPECT_EQ(line_count(csv), 3u);
  EXPECT_EQ(read_csv(csv).size(), 3u);
}

TEST(EmitTable, CsvQuotingAndNulls) {
  const auto csv = emit_table(sample_table(), TableFormat::csv);
  const auto rows = read_csv(csv);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1], (std::vector<std::string>{"a, \"quoted\"", "3", "2.5"}));
  EXPECT_EQ(rows[2], (std::vector<std::string>{"multi\nline", "0", ""}));
}

TEST(EmitTable, MarkdownEscapesPipes) {
  Table t;
  t.columns = {"a"};
  t.rows = {{std::string("x|y")}};
  const auto md = emit_table(t, TableFormat::markdown);
  EXPECT_NE(md.find("x\\|y"), std::string::npos);
  EXPECT_EQ(line_count(md), 3u);
}

TEST(EmitTable, CsvAndJsonCarrySameRows) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    Table t;
    t.columns = {"s", "i", "d"};
    const std::vector<std::string> words{"plain", "com,ma", "q\"uote", "new\nline", "تأخير", "", " pad "};
    for (int r = 0, n = static_cast<int>(rng() % 6); r < n; ++r) {
      Cell d = std::monostate{};
      if (rng() % 2) d = static_cast<double>(rng() % 10000) / 7.0;
      t.rows.push_back({words[rng() % words.size()], static_cast<std::int64_t>(rng() % 1000) - 500, d});
    }
    auto csv_rows = read_csv(emit_table(t, TableFormat::csv));
    ASSERT_FALSE(csv_rows.empty());
    EXPECT_EQ(csv_rows.front(), t.columns);
    csv_rows.erase(csv_rows.begin());

    const auto doc = json::parse(emit_table(t, TableFormat::json));
    std::vector<std::vector<std::string>> json_rows;
    for (const auto& row : doc["rows"]) {
      std::vector<std::string> cells;
      for (const auto& c : row) {
        if (c.is_null()) {
          cells.push_back("");
        } else if (c.is_string()) {
          cells.push_back(c.get<std::string>());
        } else if (c.is_number_integer()) {
          cells.push_back(std::to_string(c.get<std::int64_t>()));
        } else {
          cells.push_back(render_cell(Cell{c.get<double>()}));
        }
      }
      json_rows.push_back(std::move(cells));
    }
    std::sort(csv_rows.begin(), csv_rows.end());
    std::sort(json_rows.begin(), json_rows.end());
    EXPECT_EQ(csv_rows, json_rows);
  }
}

TEST(EmitTable, Formats) {
  EXPECT_EQ(parse_table_format("md"), TableFormat::markdown);
  EXPECT_EQ(file_extension(TableFormat::markdown), "md");
  try {
    parse_table_format("xlsx");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unknown_format);
  }
}

TEST(Plot, LineWithTwoPoints) {
  TimeSeries s;
  s.points.push_back({PeriodBucket::of({2019, 1, 1}, Granularity::year), 2, 7, 3.5});
  s.points.push_back({PeriodBucket::of({2020, 1, 1}, Granularity::year), 0, 0, std::nullopt});
  const auto doc = trajectory_plot({{"egyptair", s}});
  EXPECT_EQ(doc.kind, PlotKind::line);
  const auto j = json::parse(emit_plot(doc));
  ASSERT_EQ(j["series"].size(), 1u);
  const auto& pts = j["series"][0]["points"];
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0]["x"], "2019");
  EXPECT_EQ(pts[0]["y"], 3.5);
  EXPECT_TRUE(pts[1]["y"].is_null());
  EXPECT_FALSE(render_svg(doc).empty());
}

TEST(Plot, ThemesHaveEightSeries) {
  ThemeEvolutionSeries th;
  th.buckets = {PeriodBucket::of({2019, 1, 1}, Granularity::year)};
  for (const auto& c : default_taxonomy().categories()) th.series.push_back({c.id, {1}});
  th.totals = {8};
  const auto doc = themes_plot(th);
  EXPECT_EQ(doc.kind, PlotKind::stacked_area);
  EXPECT_TRUE(doc.consistent());
  const auto j = json::parse(emit_plot(doc));
  ASSERT_EQ(j["series"].size(), 8u);
  std::set<std::string> names;
  for (const auto& s : j["series"]) names.insert(s["name"].get<std::string>());
  EXPECT_EQ(names.size(), 8u);
}

TEST(Plot, EmptySeriesStillValid) {
  const auto doc = trajectory_plot({});
  const auto j = json::parse(emit_plot(doc));
  EXPECT_TRUE(j["series"].empty());
  EXPECT_TRUE(j.contains("x_axis"));
  EXPECT_TRUE(j["y_axis"].contains("label"));
}

TEST(Tables, FrequencyAndThemesLayout) {
  IssueFrequencyTable f;
  f.rows = {{"flight_delays_cancellations", "flight_disruptions", 690}};
  const auto csv = emit_table(frequency_table(f), TableFormat::csv);
  EXPECT_EQ(csv, "label,category,count\nflight_delays_cancellations,flight_disruptions,690\n");

  ThemeEvolutionSeries th;
  for (const auto& c : default_taxonomy().categories()) th.series.push_back({c.id, {}});
  EXPECT_EQ(themes_table(th).columns.size(), 10u);

  GapSeries g;
  g.points = {{PeriodBucket::of({2024, 1, 1}, Granularity::year), -1.9}};
  g.skipped = {PeriodBucket::of({2025, 1, 1}, Granularity::year)};
  const auto t = compare_table(g);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_TRUE(std::holds_alternative<std::monostate>(t.rows[1][1]));
}

TEST(Manifest, RunIdIgnoresPathsAndTimes) {
  RunManifest a;
  a.command = "analyze";
  a.config_hash = "c";
  a.inputs = {{"store", "/tmp/a", "abc"}};
  a.taxonomy_version = "v1";
  a.extractor_id = "lexicon:v1";
  a.started_at = "2026-01-01T00:00:00Z";
  auto b = a;
  b.inputs[0].path = "/elsewhere";
  b.started_at = "2027-01-01T00:00:00Z";
  EXPECT_EQ(a.run_id(), b.run_id());
  EXPECT_EQ(a.run_id().size(), 16u);
  b.inputs[0].sha256 = "abd";
  EXPECT_NE(a.run_id(), b.run_id());
  const auto j = json::parse(emit_manifest(a));
  EXPECT_EQ(j["run_id"], a.run_id());
}
