#include "airlens/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>

#include "airlens/error.hpp"
#include "airlens/hash.hpp"

namespace airlens {

namespace {

using ojson = nlohmann::ordered_json;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string markdown_field(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n' || c == '\r') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

ojson cell_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> ojson {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else {
          return v;
        }
      },
      c);
}

Cell opt_cell(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }

ojson opt_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

}  // namespace

TableFormat parse_table_format(std::string_view s) {
  if (s == "csv") return TableFormat::csv;
  if (s == "markdown" || s == "md") return TableFormat::markdown;
  if (s == "json") return TableFormat::json;
  throw Error(Errc::unknown_format, std::string(s));
}

std::string_view to_string(TableFormat f) noexcept {
  switch (f) {
    case TableFormat::csv: return "csv";
    case TableFormat::markdown: return "markdown";
    case TableFormat::json: return "json";
  }
  return "csv";
}

std::string_view file_extension(TableFormat f) noexcept {
  switch (f) {
    case TableFormat::csv: return "csv";
    case TableFormat::markdown: return "md";
    case TableFormat::json: return "json";
  }
  return "csv";
}

std::string render_cell(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return {};
        } else if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else {
          return fmt::format("{}", v);
        }
      },
      cell);
}

std::string emit_table(const Table& table, TableFormat format) {
  std::string out;
  switch (format) {
    case TableFormat::csv: {
      auto line = [&](auto&& fields) {
        bool first = true;
        for (const auto& f : fields) {
          if (!first) out += ',';
          first = false;
          out += csv_field(f);
        }
        out += '\n';
      };
      line(table.columns);
      for (const auto& row : table.rows) {
        std::vector<std::string> fields;
        for (const auto& c : row) fields.push_back(render_cell(c));
        line(fields);
      }
      break;
    }
    case TableFormat::markdown: {
      auto line = [&](const std::vector<std::string>& fields) {
        out += '|';
        for (const auto& f : fields) out += ' ' + markdown_field(f) + " |";
        out += '\n';
      };
      line(table.columns);
      out += '|';
      for (std::size_t i = 0; i < table.columns.size(); ++i) out += " --- |";
      out += '\n';
      for (const auto& row : table.rows) {
        std::vector<std::string> fields;
        for (const auto& c : row) fields.push_back(render_cell(c));
        line(fields);
      }
      break;
    }
    case TableFormat::json: {
      ojson doc;
      doc["columns"] = table.columns;
      doc["rows"] = ojson::array();
      for (const auto& row : table.rows) {
        ojson r = ojson::array();
        for (const auto& c : row) r.push_back(cell_json(c));
        doc["rows"].push_back(std::move(r));
      }
      out = doc.dump(2) + '\n';
      break;
    }
  }
  return out;
}

Table frequency_table(const IssueFrequencyTable& t) {
  Table out{{"label", "category", "count"}, {}};
  for (const auto& r : t.rows) out.rows.push_back({r.label, r.category, r.count});
  return out;
}

Table category_totals_table(const IssueFrequencyTable& t, const Taxonomy& taxonomy) {
  Table out{{"category", "display_name", "count"}, {}};
  for (const auto& c : t.category_totals) {
    out.rows.push_back({c.category, taxonomy.category(c.category).display_name, c.count});
  }
  return out;
}

Table trajectory_table(const std::map<std::string, TimeSeries>& per_airline) {
  Table out{{"airline", "bucket", "count", "mean_rating"}, {}};
  for (const auto& [airline, series] : per_airline) {
    for (const auto& p : series.points) {
      out.rows.push_back({airline, p.bucket.key(), p.count, opt_cell(p.mean_rating)});
    }
  }
  return out;
}

Table volume_table(const std::map<std::string, TimeSeries>& per_airline) {
  Table out{{"airline", "bucket", "count"}, {}};
  for (const auto& [airline, series] : per_airline) {
    for (const auto& p : series.points) out.rows.push_back({airline, p.bucket.key(), p.count});
  }
  return out;
}

Table region_table(const std::map<std::string, std::vector<RegionAggregate>>& per_airline) {
  Table out{{"airline", "region", "count", "mean_rating"}, {}};
  for (const auto& [airline, aggs] : per_airline) {
    for (const auto& a : aggs) out.rows.push_back({airline, a.region, a.count, a.mean_rating});
  }
  return out;
}

Table themes_table(const ThemeEvolutionSeries& s) {
  Table out{{"bucket"}, {}};
  for (const auto& series : s.series) out.columns.push_back(series.category);
  out.columns.push_back("total");
  for (std::size_t i = 0; i < s.buckets.size(); ++i) {
    std::vector<Cell> row{s.buckets[i].key()};
    for (const auto& series : s.series) row.emplace_back(series.counts[i]);
    row.emplace_back(s.totals[i]);
    out.rows.push_back(std::move(row));
  }
  return out;
}

Table compare_table(const GapSeries& g) {
  Table out{{"bucket", "gap"}, {}};
  std::map<PeriodBucket, std::optional<double>> rows;
  for (const auto& p : g.points) rows[p.bucket] = p.gap;
  for (const auto& b : g.skipped) rows[b] = std::nullopt;
  for (const auto& [bucket, gap] : rows) out.rows.push_back({bucket.key(), opt_cell(gap)});
  return out;
}

Table cooccurrence_table(const CoOccurrenceMatrix& m) {
  Table out{{"label"}, {}};
  for (const auto& l : m.labels) out.columns.push_back(l);
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::vector<Cell> row{m.labels[i]};
    for (std::size_t j = 0; j < m.size(); ++j) row.emplace_back(m.at(i, j));
    out.rows.push_back(std::move(row));
  }
  return out;
}

Table dataset_stats_table(const DatasetStats& s) {
  Table out{{"dimension", "key", "count"}, {}};
  out.rows.push_back({"total", "all", static_cast<std::int64_t>(s.total)});
  for (const auto& [k, v] : s.per_airline) out.rows.push_back({"airline", k, static_cast<std::int64_t>(v)});
  for (const auto& [k, v] : s.per_language) out.rows.push_back({"language", k, static_cast<std::int64_t>(v)});
  for (const auto& [k, v] : s.per_year) {
    out.rows.push_back({"year", std::to_string(k), static_cast<std::int64_t>(v)});
  }
  for (std::size_t i = 0; i < s.rating_histogram.size(); ++i) {
    out.rows.push_back({"rating", std::to_string(i + 1), static_cast<std::int64_t>(s.rating_histogram[i])});
  }
  return out;
}

std::string_view to_string(PlotKind k) noexcept {
  switch (k) {
    case PlotKind::line: return "line";
    case PlotKind::stacked_area: return "stacked_area";
    case PlotKind::bar: return "bar";
    case PlotKind::region_bar: return "region_bar";
  }
  return "line";
}

bool PlotDocument::consistent() const {
  if (kind == PlotKind::bar || kind == PlotKind::region_bar) return series.size() <= 1;
  if (kind == PlotKind::stacked_area) {
    for (const auto& s : series) {
      if (s.points.size() != series.front().points.size()) return false;
      for (std::size_t i = 0; i < s.points.size(); ++i) {
        if (s.points[i].x != series.front().points[i].x) return false;
      }
    }
  }
  return true;
}

PlotDocument trajectory_plot(const std::map<std::string, TimeSeries>& per_airline) {
  PlotDocument doc;
  doc.kind = PlotKind::line;
  doc.title = "Average rating trajectory";
  doc.source = "rating_trajectory";
  doc.x_axis = {"period", "category", {}, {}};
  doc.y_axis = {"mean rating", "linear", 1.0, 5.0};
  for (const auto& [airline, series] : per_airline) {
    PlotSeries s{airline, {}};
    for (const auto& p : series.points) s.points.push_back({p.bucket.key(), p.mean_rating, p.count});
    doc.series.push_back(std::move(s));
  }
  return doc;
}

PlotDocument volume_plot(const std::map<std::string, TimeSeries>& per_airline) {
  PlotDocument doc;
  doc.kind = PlotKind::line;
  doc.title = "Review frequency";
  doc.source = "review_frequency";
  doc.x_axis = {"period", "category", {}, {}};
  doc.y_axis = {"reviews", "linear", 0.0, {}};
  for (const auto& [airline, series] : per_airline) {
    PlotSeries s{airline, {}};
    for (const auto& p : series.points) {
      s.points.push_back({p.bucket.key(), static_cast<double>(p.count), p.count});
    }
    doc.series.push_back(std::move(s));
  }
  return doc;
}

PlotDocument frequency_plot(const IssueFrequencyTable& t) {
  PlotDocument doc;
  doc.kind = PlotKind::bar;
  doc.title = "Frequency of service issues";
  doc.source = "issue_frequency";
  doc.x_axis = {"issue", "category", {}, {}};
  doc.y_axis = {"mentions", "linear", 0.0, {}};
  PlotSeries s{"mentions", {}};
  for (const auto& r : t.rows) s.points.push_back({r.label, static_cast<double>(r.count), r.count});
  doc.series.push_back(std::move(s));
  return doc;
}

PlotDocument themes_plot(const ThemeEvolutionSeries& ev) {
  PlotDocument doc;
  doc.kind = PlotKind::stacked_area;
  doc.title = "Temporal evolution of complaint themes";
  doc.source = "theme_evolution";
  doc.x_axis = {"period", "category", {}, {}};
  doc.y_axis = {"mentions", "linear", 0.0, {}};
  for (const auto& series : ev.series) {
    PlotSeries s{series.category, {}};
    for (std::size_t i = 0; i < ev.buckets.size(); ++i) {
      s.points.push_back({ev.buckets[i].key(), static_cast<double>(series.counts[i]), series.counts[i]});
    }
    doc.series.push_back(std::move(s));
  }
  return doc;
}

PlotDocument region_plot(const std::string& airline, const std::vector<RegionAggregate>& aggregates) {
  PlotDocument doc;
  doc.kind = PlotKind::region_bar;
  doc.title = fmt::format("Average rating by origin region ({})", airline);
  doc.source = "region_segmentation";
  doc.x_axis = {"region", "category", {}, {}};
  doc.y_axis = {"mean rating", "linear", 1.0, 5.0};
  PlotSeries s{airline, {}};
  for (const auto& a : aggregates) s.points.push_back({a.region, a.mean_rating, a.count});
  doc.series.push_back(std::move(s));
  return doc;
}

PlotDocument compare_plot(const GapSeries& g, const std::string& a, const std::string& b) {
  PlotDocument doc;
  doc.kind = PlotKind::line;
  doc.title = fmt::format("Rating gap {} minus {}", a, b);
  doc.source = "compare_airlines";
  doc.x_axis = {"period", "category", {}, {}};
  doc.y_axis = {"rating gap", "linear", -4.0, 4.0};
  PlotSeries s{fmt::format("{}-{}", a, b), {}};
  std::map<PeriodBucket, std::optional<double>> rows;
  for (const auto& p : g.points) rows[p.bucket] = p.gap;
  for (const auto& bucket : g.skipped) rows[bucket] = std::nullopt;
  for (const auto& [bucket, gap] : rows) s.points.push_back({bucket.key(), gap, std::nullopt});
  doc.series.push_back(std::move(s));
  return doc;
}

std::string emit_plot(const PlotDocument& doc) {
  auto axis = [](const PlotAxis& a) {
    ojson j;
    j["label"] = a.label;
    j["scale"] = a.scale;
    j["min"] = opt_json(a.min);
    j["max"] = opt_json(a.max);
    return j;
  };
  ojson j;
  j["kind"] = to_string(doc.kind);
  j["title"] = doc.title;
  j["source"] = doc.source;
  j["run_id"] = doc.run_id;
  j["x_axis"] = axis(doc.x_axis);
  j["y_axis"] = axis(doc.y_axis);
  j["series"] = ojson::array();
  for (const auto& s : doc.series) {
    ojson js;
    js["name"] = s.name;
    js["points"] = ojson::array();
    for (const auto& p : s.points) {
      ojson jp;
      jp["x"] = p.x;
      jp["y"] = opt_json(p.y);
      if (p.n) jp["n"] = *p.n;
      js["points"].push_back(std::move(jp));
    }
    j["series"].push_back(std::move(js));
  }
  return j.dump(2) + '\n';
}

std::string render_svg(const PlotDocument& doc) {
  if (!doc.consistent()) return {};
  constexpr double kWidth = 800, kHeight = 420, kLeft = 60, kRight = 160, kTop = 40, kBottom = 90;
  constexpr std::string_view kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  std::vector<std::string> xs;
  for (const auto& s : doc.series) {
    for (const auto& p : s.points) {
      if (std::find(xs.begin(), xs.end(), p.x) == xs.end()) xs.push_back(p.x);
    }
  }
  const bool stacked = doc.kind == PlotKind::stacked_area;
  std::vector<double> stack_top(xs.size(), 0.0);
  double lo = doc.y_axis.min.value_or(0.0);
  double hi = lo;
  for (const auto& s : doc.series) {
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      const double v = s.points[i].y.value_or(0.0);
      if (stacked) {
        stack_top[i] += v;
        hi = std::max(hi, stack_top[i]);
      } else {
        hi = std::max(hi, v);
        lo = std::min(lo, v);
      }
    }
  }
  if (doc.y_axis.max) hi = std::max(hi, *doc.y_axis.max);
  if (hi <= lo) hi = lo + 1.0;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](std::size_t i) {
    return xs.size() <= 1 ? kLeft + plot_w / 2 : kLeft + plot_w * static_cast<double>(i) / (xs.size() - 1);
  };
  auto py = [&](double v) { return kTop + plot_h * (1.0 - (v - lo) / (hi - lo)); };
  auto index_of = [&](const std::string& x) {
    return static_cast<std::size_t>(std::find(xs.begin(), xs.end(), x) - xs.begin());
  };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
      "font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"20\" font-size=\"14\">{}</text>\n",
      kWidth, kHeight, kLeft, doc.title);
  out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", kLeft, kTop,
                     kTop + plot_h);
  out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", kLeft,
                     py(std::max(lo, 0.0) == lo ? lo : 0.0), kLeft + plot_w);
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    out += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.2f}</text>\n", kLeft - 4, py(v) + 4, v);
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out += fmt::format(
        "<text x=\"{0:.1f}\" y=\"{1}\" text-anchor=\"end\" transform=\"rotate(-45 {0:.1f} {1})\">{2}</text>\n",
        px(i), kTop + plot_h + 14, xs[i]);
  }

  std::vector<double> base(xs.size(), 0.0);
  for (std::size_t si = 0; si < doc.series.size(); ++si) {
    const auto& s = doc.series[si];
    const auto color = kPalette[si % std::size(kPalette)];
    if (doc.kind == PlotKind::bar || doc.kind == PlotKind::region_bar) {
      const double bw = xs.empty() ? 0 : std::max(2.0, plot_w / xs.size() * 0.7);
      for (const auto& p : s.points) {
        if (!p.y) continue;
        const double x = px(index_of(p.x)) - bw / 2;
        out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"{}\"/>\n", x,
                           py(*p.y), bw, std::max(0.0, py(lo) - py(*p.y)), color);
      }
    } else if (stacked) {
      std::string poly;
      for (std::size_t i = 0; i < s.points.size(); ++i) {
        poly += fmt::format("{:.1f},{:.1f} ", px(i), py(base[i] + s.points[i].y.value_or(0.0)));
      }
      for (std::size_t i = s.points.size(); i-- > 0;) poly += fmt::format("{:.1f},{:.1f} ", px(i), py(base[i]));
      for (std::size_t i = 0; i < s.points.size(); ++i) base[i] += s.points[i].y.value_or(0.0);
      out += fmt::format("<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.8\"/>\n", poly, color);
    } else {
      std::string path;
      for (const auto& p : s.points) {
        if (!p.y) {
          path += ' ';
          continue;
        }
        path += fmt::format("{}{:.1f},{:.1f}", path.empty() || path.back() == ' ' ? 'M' : 'L', px(index_of(p.x)),
                            py(*p.y));
      }
      out += fmt::format("<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n", path, color);
    }
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n", kWidth - kRight + 10,
                       kTop + 16 * si, color);
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kWidth - kRight + 24, kTop + 16 * si + 9, s.name);
  }
  out += "</svg>\n";
  return out;
}

std::string RunManifest::run_id() const {
  ojson j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["inputs"] = ojson::array();
  for (const auto& in : inputs) j["inputs"].push_back({{"name", in.name}, {"sha256", in.sha256}});
  j["taxonomy_version"] = taxonomy_version;
  j["extractor_id"] = extractor_id;
  return sha256_hex(j.dump()).substr(0, 16);
}

std::string emit_manifest(const RunManifest& m) {
  ojson j;
  j["run_id"] = m.run_id();
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["taxonomy_version"] = m.taxonomy_version;
  j["extractor_id"] = m.extractor_id;
  j["inputs"] = ojson::array();
  for (const auto& in : m.inputs) {
    j["inputs"].push_back({{"name", in.name}, {"path", in.path}, {"sha256", in.sha256}});
  }
  j["artifacts"] = ojson::array();
  for (const auto& a : m.artifacts) j["artifacts"].push_back({{"path", a.path}, {"sha256", a.sha256}});
  j["summary"] = ojson::object();
  for (const auto& [k, v] : m.summary) j["summary"][k] = v;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  return j.dump(2) + '\n';
}

std::string utc_timestamp() {
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", now);
}

}  // namespace airlens
