#include "airlens/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "airlens/analytics.hpp"
#include "airlens/extraction.hpp"
#include "airlens/hash.hpp"
#include "airlens/ingest.hpp"
#include "airlens/lexicon.hpp"
#include "airlens/providers.hpp"
#include "airlens/region_map.hpp"
#include "airlens/report.hpp"
#include "airlens/resources.hpp"
#include "airlens/store.hpp"
#include "airlens/taxonomy.hpp"
#include "airlens/text.hpp"

namespace airlens::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kVersion = "0.1.0";
constexpr std::string_view kBundled = "<bundled>";

struct EmptyData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::string store = "airlens-store";
  std::string out = "out";
  std::string format = "csv";
  std::string taxonomy;
  std::string region_map;
  std::string lexicon;
};

struct WindowOptions {
  std::string from;
  std::string to;

  std::optional<DateRange> range() const {
    if (from.empty() && to.empty()) return std::nullopt;
    DateRange r{from.empty() ? Date{1, 1, 1} : *Date::parse(from), to.empty() ? Date{9999, 12, 31} : *Date::parse(to)};
    if (r.to < r.from) throw Error(Errc::inverted_range, fmt::format("{} > {}", from, to));
    return r;
  }

  void add_to(std::map<std::string, std::string>& settings) const {
    settings["from"] = from;
    settings["to"] = to;
  }
};

struct Context {
  GlobalOptions g;
  std::ostream& out;
  std::ostream& err;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(Errc::io, "cannot read " + path.string());
  return std::move(buf).str();
}

void write_file(const fs::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
}

Format infer_format(const fs::path& p) {
  const auto ext = text::ascii_lower(p.extension().string());
  if (ext == ".csv") return Format::csv;
  if (ext == ".jsonl" || ext == ".ndjson" || ext == ".json") return Format::jsonl;
  throw Error(Errc::unknown_format, "cannot infer format of " + p.string() + "; pass --input-format");
}

std::string config_hash(const std::map<std::string, std::string>& settings) {
  std::string canonical;
  for (const auto& [k, v] : settings) canonical += k + '=' + v + '\n';
  return sha256_hex(canonical);
}

struct Loaded {
  Taxonomy taxonomy;
  InputDigest taxonomy_input;
};

// Configuration documents are part of the configuration: any failure to load
// them is reported as a configuration error.
template <typename F>
auto load_config_document(const std::string& path, std::string_view bundled, std::string_view role, F&& load) {
  std::string doc;
  try {
    doc = path.empty() ? std::string(bundled) : read_file(path);
    return std::make_pair(load(doc), InputDigest{std::string(role), path.empty() ? std::string(kBundled) : path,
                                                 sha256_hex(doc)});
  } catch (const Error& e) {
    throw Error(Errc::invalid_config, fmt::format("{} {}: {}", role, path.empty() ? kBundled : path, e.what()));
  }
}

std::pair<Taxonomy, InputDigest> load_taxonomy_input(const GlobalOptions& g) {
  return load_config_document(g.taxonomy, resources::taxonomy_document(), "taxonomy",
                              [](std::string_view d) { return load_taxonomy(d); });
}

std::pair<RegionMap, InputDigest> load_region_map_input(const GlobalOptions& g) {
  return load_config_document(g.region_map, resources::region_map_document(), "region_map",
                              [](std::string_view d) { return load_region_map(d); });
}

std::pair<Lexicon, InputDigest> load_lexicon_input(const GlobalOptions& g, const Taxonomy& taxonomy) {
  return load_config_document(g.lexicon, resources::lexicon_document(), "lexicon",
                              [&](std::string_view d) { return load_lexicon(d, taxonomy); });
}

class Artifacts {
 public:
  Artifacts(fs::path dir, RunManifest& manifest) : dir_(std::move(dir)), manifest_(manifest) {}

  void write(const std::string& relative, const std::string& content) {
    write_file(dir_ / relative, content);
    manifest_.artifacts.push_back({relative, sha256_hex(content)});
  }

  void write_at(const fs::path& path, const std::string& content) {
    write_file(path, content);
    manifest_.artifacts.push_back({path.generic_string(), sha256_hex(content)});
  }

  void finish() {
    manifest_.finished_at = utc_timestamp();
    write_file(dir_ / fmt::format("manifest.{}.json", manifest_.command), emit_manifest(manifest_));
  }

  std::size_t count() const { return manifest_.artifacts.size(); }

 private:
  fs::path dir_;
  RunManifest& manifest_;
};

RunManifest start_manifest(std::string command) {
  RunManifest m;
  m.command = std::move(command);
  m.started_at = utc_timestamp();
  return m;
}

// ---------------------------------------------------------------- ingest

struct IngestOptions {
  std::vector<std::string> paths;
  std::string input_format;
  std::string reject_report;
  WindowOptions window;
};

int cmd_ingest(const Context& c, const IngestOptions& o) {
  auto manifest = start_manifest("ingest");
  std::map<std::string, std::string> settings{{"input_format", o.input_format}};
  o.window.add_to(settings);
  manifest.config_hash = config_hash(settings);
  Artifacts artifacts(c.g.out, manifest);

  ParseOptions po;
  if (auto w = o.window.range()) po.window = *w;
  std::map<Format, std::vector<fs::path>> groups;
  for (const auto& p : o.paths) {
    groups[o.input_format.empty() ? infer_format(p) : parse_format(o.input_format)].push_back(p);
  }
  std::vector<ReviewRecord> records;
  std::vector<std::string> sources;
  RejectReport rejects;
  for (const auto& [format, paths] : groups) {
    auto parsed = parse_files(paths, format, po);
    for (auto& r : parsed.dataset.records) records.push_back(std::move(r));
    for (auto& r : parsed.rejects.rejects) rejects.rejects.push_back(std::move(r));
    for (const auto& p : paths) {
      sources.push_back(p.string());
      manifest.inputs.push_back({"input", p.string(), sha256_hex(read_file(p))});
    }
  }
  const auto parsed_count = records.size();
  auto [ds, dropped] = deduplicate(make_dataset(std::move(records), sources));

  // One "<input name>.rejects.jsonl" per input with rejects, unless a single
  // report path is given.
  std::vector<std::string> reject_paths;
  if (!rejects.empty() && !o.reject_report.empty()) {
    artifacts.write_at(o.reject_report, reject_report_jsonl(rejects));
    reject_paths.push_back(o.reject_report);
  } else if (!rejects.empty()) {
    std::map<std::string, RejectReport> per_source;
    for (const auto& r : rejects.rejects) per_source[r.source].rejects.push_back(r);
    for (const auto& [source, report] : per_source) {
      const auto name = fs::path(source).filename().string() + ".rejects.jsonl";
      artifacts.write(name, reject_report_jsonl(report));
      reject_paths.push_back((fs::path(c.g.out) / name).generic_string());
    }
  }
  c.out << fmt::format("parsed {} records, rejected {}, duplicates {}\n", parsed_count, rejects.size(), dropped);
  for (const auto& p : reject_paths) c.out << fmt::format("reject report: {}\n", p);

  manifest.summary = {{"parsed", std::to_string(parsed_count)},
                      {"rejected", std::to_string(rejects.size())},
                      {"duplicates", std::to_string(dropped)}};
  if (ds.empty()) {
    artifacts.finish();
    throw EmptyData("no valid records to ingest");
  }
  auto store = Store::open(c.g.store, StoreMode::read_write);
  const auto changed = store.put_reviews(ds);
  manifest.summary["stored"] = std::to_string(changed);
  manifest.summary["store_reviews"] = std::to_string(store.review_count());
  manifest.inputs.push_back({"store", c.g.store, store.state_digest()});
  c.out << fmt::format("stored {} new or changed reviews; store holds {}\n", changed, store.review_count());
  artifacts.finish();
  return kOk;
}

// ---------------------------------------------------------------- filter

struct FilterOptions {
  int max_rating = kDiagnosticMaxRating;
  std::string output;
  std::string output_format = "jsonl";
  WindowOptions window;
};

int cmd_filter(const Context& c, const FilterOptions& o) {
  auto manifest = start_manifest("filter");
  std::map<std::string, std::string> settings{{"max_rating", std::to_string(o.max_rating)},
                                              {"output_format", o.output_format}};
  o.window.add_to(settings);
  manifest.config_hash = config_hash(settings);
  Artifacts artifacts(c.g.out, manifest);

  const auto format = parse_format(o.output_format);
  auto store = Store::open(c.g.store, StoreMode::read_only);
  manifest.inputs.push_back({"store", c.g.store, store.state_digest()});
  auto ds = store.reviews();
  if (ds.empty()) throw EmptyData("store holds no reviews");
  if (auto w = o.window.range()) ds = window_filter(ds, w->from, w->to);
  const auto kept = diagnostic_filter(ds, o.max_rating);

  const fs::path output = o.output.empty()
                              ? fs::path(c.g.out) / fmt::format("filtered.{}", to_string(format))
                              : fs::path(o.output);
  artifacts.write_at(output, serialize_dataset(kept, format));
  manifest.summary = {{"input", std::to_string(ds.size())}, {"kept", std::to_string(kept.size())}};
  c.out << fmt::format("kept {} of {} reviews rated <= {}; wrote {}\n", kept.size(), ds.size(), o.max_rating,
                       output.generic_string());
  artifacts.finish();
  if (kept.empty()) throw EmptyData("no reviews left after filtering");
  return kOk;
}

// ---------------------------------------------------------------- extract

struct ExtractOptions {
  std::string extractor = "lexicon";
  std::string input;
  bool filter = false;
  std::string goldens;
  std::string endpoint;
  std::string model;
  int max_retries = 2;
  int concurrency = 4;
  int timeout = 60;
};

int cmd_extract(const Context& c, const ExtractOptions& o) {
  auto manifest = start_manifest("extract");
  std::map<std::string, std::string> settings{
      {"extractor", o.extractor},   {"filter", o.filter ? "true" : "false"},
      {"model", o.model},           {"endpoint", o.endpoint},
      {"max_retries", std::to_string(o.max_retries)}, {"concurrency", std::to_string(o.concurrency)},
      {"timeout", std::to_string(o.timeout)}};
  manifest.config_hash = config_hash(settings);
  Artifacts artifacts(c.g.out, manifest);

  auto [taxonomy, taxonomy_input] = load_taxonomy_input(c.g);
  manifest.taxonomy_version = taxonomy.version();
  manifest.inputs.push_back(taxonomy_input);

  ExtractorConfig cfg;
  cfg.max_retries = o.max_retries;
  cfg.concurrency_limit = o.concurrency;
  cfg.timeout = std::chrono::seconds(o.timeout);
  cfg.endpoint = o.endpoint;
  cfg.model = o.model.empty() ? (o.extractor == "recorded" ? "recorded" : "default") : o.model;
  cfg.validate();

  std::unique_ptr<ProviderClient> client;
  if (o.extractor == "provider") {
    const char* key = std::getenv(kApiKeyEnv);
    if (key == nullptr || *key == '\0') {
      throw Error(Errc::authentication, fmt::format("{} is not set", kApiKeyEnv));
    }
    if (o.endpoint.empty()) throw Error(Errc::invalid_config, "--endpoint is required for the provider extractor");
    client = std::make_unique<HttpProviderClient>(o.endpoint, key);
  } else if (o.extractor == "recorded") {
    if (o.goldens.empty()) throw Error(Errc::invalid_config, "--goldens is required for the recorded extractor");
    if (!fs::is_directory(o.goldens)) throw Error(Errc::invalid_config, "no golden directory " + o.goldens);
    client = std::make_unique<RecordedProviderClient>(o.goldens);
  }

  auto store = Store::open(c.g.store, StoreMode::read_write);
  Dataset ds;
  if (!o.input.empty()) {
    auto parsed = parse_files({fs::path(o.input)}, infer_format(o.input));
    if (!parsed.rejects.empty()) c.out << fmt::format("input: {} rows rejected\n", parsed.rejects.size());
    ds = deduplicate(parsed.dataset).first;
    manifest.inputs.push_back({"input", o.input, sha256_hex(read_file(o.input))});
    store.put_reviews(ds);
  } else {
    ds = store.reviews();
  }
  if (o.filter) ds = diagnostic_filter(ds, kDiagnosticMaxRating);
  if (ds.empty()) throw EmptyData("no reviews to extract");
  for (const auto& r : ds.records) {
    if (r.rating > kDiagnosticMaxRating) {
      throw Error(Errc::unfiltered_input,
                  fmt::format("review {} is rated {}; run filter first or pass --filter", r.review_id, r.rating));
    }
  }
  manifest.inputs.push_back({"dataset", "", sha256_hex(serialize_dataset(ds, Format::jsonl))});

  BatchSummary summary;
  if (o.extractor == "lexicon") {
    auto [lexicon, lexicon_input] = load_lexicon_input(c.g, taxonomy);
    manifest.inputs.push_back(lexicon_input);
    manifest.extractor_id = lexicon.extractor_id();
    summary = lexicon_batch(ds, lexicon, store);
  } else {
    manifest.extractor_id = cfg.model;
    summary = extract_batch(ds, *client, cfg, taxonomy, store);
  }
  manifest.summary = {{"total", std::to_string(summary.total)},   {"skipped", std::to_string(summary.skipped)},
                      {"ok", std::to_string(summary.ok)},         {"failed", std::to_string(summary.failed)},
                      {"requests", std::to_string(summary.requests)}};
  c.out << fmt::format("extractor {}: {} reviews, {} already done, {} ok, {} failed, {} requests\n",
                       manifest.extractor_id, summary.total, summary.skipped, summary.ok, summary.failed,
                       summary.requests);
  artifacts.finish();
  return kOk;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOptions {
  std::string which = "all";
  WindowOptions window;
  std::string granularity = "year";
  std::vector<std::string> airlines;
  std::vector<std::string> compare;
  std::string extractor_id;
  bool no_svg = false;
};

struct AnalysisInputs {
  Taxonomy taxonomy;
  RegionMap region_map;
  Dataset reviews;
  std::map<std::string, Dataset> per_airline;
  std::vector<ExtractedReview> results;
  std::optional<DateRange> window;
  Granularity granularity = Granularity::year;
};

AnalysisInputs load_analysis_inputs(const Context& c, const AnalyzeOptions& o, RunManifest& manifest) {
  auto [taxonomy, taxonomy_input] = load_taxonomy_input(c.g);
  auto [region_map, region_input] = load_region_map_input(c.g);
  AnalysisInputs in{std::move(taxonomy), std::move(region_map), {}, {}, {}, o.window.range(),
                    parse_granularity(o.granularity)};
  manifest.taxonomy_version = in.taxonomy.version();

  auto store = Store::open(c.g.store, StoreMode::read_only);
  manifest.inputs.push_back({"store", c.g.store, store.state_digest()});
  manifest.inputs.push_back(taxonomy_input);
  manifest.inputs.push_back(region_input);
  if (store.review_count() == 0) throw EmptyData("store holds no reviews");

  const std::set<std::string> airlines(o.airlines.begin(), o.airlines.end());
  auto keep = [&](const ReviewRecord& r) {
    return (airlines.empty() || airlines.contains(r.airline)) && (!in.window || in.window->contains(r.review_date));
  };
  std::vector<ReviewRecord> records;
  for (auto& r : store.reviews().records) {
    if (keep(r)) records.push_back(std::move(r));
  }
  in.reviews = make_dataset(std::move(records));
  std::map<std::string, std::vector<ReviewRecord>> grouped;
  for (const auto& r : in.reviews.records) grouped[r.airline].push_back(r);
  for (auto& [airline, rs] : grouped) in.per_airline.emplace(airline, make_dataset(std::move(rs)));

  Query q;
  q.status = ExtractionStatus::ok;
  if (!o.extractor_id.empty()) q.extractor_id = o.extractor_id;
  std::set<std::string> extractors;
  for (auto& e : store.query_extractions(q)) {
    if (!keep(e.review)) continue;
    extractors.insert(e.result.extractor_id);
    in.results.push_back(std::move(e));
  }
  if (extractors.size() > 1) {
    std::string names;
    for (const auto& e : extractors) names += (names.empty() ? "" : ", ") + e;
    throw Error(Errc::invalid_config,
                fmt::format("store holds results from several extractors ({}); pass --extractor-id", names));
  }
  manifest.extractor_id = extractors.empty() ? o.extractor_id : *extractors.begin();
  return in;
}

class AnalysisWriter {
 public:
  AnalysisWriter(Artifacts& artifacts, TableFormat format, std::string run_id, bool svg)
      : artifacts_(artifacts), format_(format), run_id_(std::move(run_id)), svg_(svg) {}

  void table(const std::string& stem, const Table& t) {
    artifacts_.write(fmt::format("{}.{}", stem, file_extension(format_)), emit_table(t, format_));
  }

  void plot(const std::string& stem, PlotDocument doc) {
    doc.run_id = run_id_;
    artifacts_.write(stem + ".plot.json", emit_plot(doc));
    if (!svg_) return;
    try {
      if (auto svg = render_svg(doc); !svg.empty()) artifacts_.write(stem + ".svg", svg);
    } catch (const std::exception&) {
      // Chart rendering is best-effort.
    }
  }

 private:
  Artifacts& artifacts_;
  TableFormat format_;
  std::string run_id_;
  bool svg_;
};

std::map<std::string, TimeSeries> per_airline_series(const AnalysisInputs& in, bool with_mean) {
  std::map<std::string, TimeSeries> out;
  for (const auto& [airline, ds] : in.per_airline) {
    out.emplace(airline, with_mean ? rating_trajectory(ds, in.granularity) : review_frequency(ds, in.granularity));
  }
  return out;
}

std::optional<std::pair<std::string, std::string>> compare_pair(const AnalysisInputs& in, const AnalyzeOptions& o,
                                                                bool required) {
  if (o.compare.size() == 2) {
    for (const auto& a : o.compare) {
      if (!in.per_airline.contains(a)) throw EmptyData("no reviews for airline " + a);
    }
    return std::make_pair(o.compare[0], o.compare[1]);
  }
  if (!o.compare.empty()) throw Error(Errc::invalid_config, "--compare takes exactly two airlines");
  if (in.per_airline.size() == 2) return std::make_pair(in.per_airline.begin()->first, in.per_airline.rbegin()->first);
  if (!required) return std::nullopt;
  if (in.per_airline.size() < 2) throw EmptyData("comparison needs reviews from two airlines");
  throw Error(Errc::invalid_config, "more than two airlines present; pass --compare A B");
}

int cmd_analyze(const Context& c, const AnalyzeOptions& o) {
  auto manifest = start_manifest("analyze");
  std::map<std::string, std::string> settings{{"which", o.which},
                                              {"granularity", o.granularity},
                                              {"format", c.g.format},
                                              {"svg", o.no_svg ? "false" : "true"}};
  o.window.add_to(settings);
  for (const auto& a : o.airlines) settings["airline." + a] = "1";
  if (!o.compare.empty()) settings["compare"] = fmt::format("{},{}", o.compare.front(), o.compare.back());
  settings["extractor_id"] = o.extractor_id;
  manifest.config_hash = config_hash(settings);
  const auto format = parse_table_format(c.g.format);

  auto in = load_analysis_inputs(c, o, manifest);
  Artifacts artifacts(c.g.out, manifest);
  AnalysisWriter writer(artifacts, format, manifest.run_id(), !o.no_svg);
  const bool all = o.which == "all";
  auto wants = [&](std::string_view name) { return all || o.which == name; };
  auto need_results = [&]() {
    if (!all && in.results.empty()) throw EmptyData("store holds no ok extraction results");
  };

  if (wants("frequency")) {
    need_results();
    const auto t = issue_frequency(in.results, in.taxonomy, in.window);
    writer.table("frequency", frequency_table(t));
    writer.table("frequency_categories", category_totals_table(t, in.taxonomy));
    writer.plot("frequency", frequency_plot(t));
    manifest.summary["mentions"] = std::to_string(t.total);
  }
  if (wants("trajectory")) {
    const auto series = per_airline_series(in, true);
    writer.table("trajectory", trajectory_table(series));
    writer.plot("trajectory", trajectory_plot(series));
  }
  if (wants("volume")) {
    const auto series = per_airline_series(in, false);
    writer.table("volume", volume_table(series));
    writer.plot("volume", volume_plot(series));
  }
  if (wants("regions")) {
    std::map<std::string, std::vector<RegionAggregate>> per_airline;
    for (const auto& [airline, ds] : in.per_airline) per_airline[airline] = region_segmentation(ds, in.region_map);
    writer.table("regions", region_table(per_airline));
    for (const auto& [airline, aggs] : per_airline) writer.plot("regions_" + airline, region_plot(airline, aggs));
  }
  if (wants("themes")) {
    need_results();
    const auto ev = theme_evolution(in.results, in.taxonomy, in.granularity);
    writer.table("themes", themes_table(ev));
    writer.plot("themes", themes_plot(ev));
  }
  if (wants("compare")) {
    if (auto pair = compare_pair(in, o, !all)) {
      const auto series = per_airline_series(in, true);
      const auto gap = compare_airlines(series.at(pair->first), series.at(pair->second));
      writer.table("compare", compare_table(gap));
      writer.plot("compare", compare_plot(gap, pair->first, pair->second));
      manifest.summary["compare"] = fmt::format("{}-{}", pair->first, pair->second);
    } else {
      c.out << "compare: skipped, needs exactly two airlines or --compare\n";
    }
  }
  if (wants("cooccurrence")) {
    need_results();
    writer.table("cooccurrence", cooccurrence_table(co_occurrence(in.results, in.taxonomy)));
  }
  manifest.summary["reviews"] = std::to_string(in.reviews.size());
  manifest.summary["results"] = std::to_string(in.results.size());
  c.out << fmt::format("analyze {}: {} reviews, {} extraction results; wrote {} artifacts to {}\n", o.which,
                       in.reviews.size(), in.results.size(), artifacts.count(), c.g.out);
  artifacts.finish();
  return kOk;
}

// ---------------------------------------------------------------- report

int cmd_report(const Context& c, const AnalyzeOptions& o) {
  auto manifest = start_manifest("report");
  std::map<std::string, std::string> settings{{"granularity", o.granularity}};
  o.window.add_to(settings);
  for (const auto& a : o.airlines) settings["airline." + a] = "1";
  settings["extractor_id"] = o.extractor_id;
  manifest.config_hash = config_hash(settings);
  auto in = load_analysis_inputs(c, o, manifest);
  Artifacts artifacts(c.g.out, manifest);

  std::string md = "# Airline review diagnostics\n\n";
  md += fmt::format("Run `{}`. Taxonomy `{}`.", manifest.run_id(), manifest.taxonomy_version);
  if (!manifest.extractor_id.empty()) md += fmt::format(" Extractor `{}`.", manifest.extractor_id);
  md += "\n\n## Dataset\n\n" + emit_table(dataset_stats_table(dataset_stats(in.reviews)), TableFormat::markdown);
  md += "\n## Rating trajectory\n\n" +
        emit_table(trajectory_table(per_airline_series(in, true)), TableFormat::markdown);
  std::map<std::string, std::vector<RegionAggregate>> regions;
  for (const auto& [airline, ds] : in.per_airline) regions[airline] = region_segmentation(ds, in.region_map);
  md += "\n## Origin regions\n\n" + emit_table(region_table(regions), TableFormat::markdown);
  if (!in.results.empty()) {
    const auto t = issue_frequency(in.results, in.taxonomy, in.window);
    md += "\n## Issue categories\n\n" + emit_table(category_totals_table(t, in.taxonomy), TableFormat::markdown);
    md += "\n## Issues\n\n" + emit_table(frequency_table(t), TableFormat::markdown);
    md += "\n## Themes\n\n" +
          emit_table(themes_table(theme_evolution(in.results, in.taxonomy, in.granularity)), TableFormat::markdown);
  } else {
    md += "\nNo extraction results in the store.\n";
  }
  artifacts.write("report.md", md);
  c.out << fmt::format("wrote {}\n", (fs::path(c.g.out) / "report.md").generic_string());
  artifacts.finish();
  return kOk;
}

// ---------------------------------------------------------------- store-verify

int cmd_store_verify(const Context& c) {
  const auto report = verify_store(c.g.store);
  c.out << fmt::format("segments {}, records {}, reviews {}, extractions {}\n", report.segments, report.records,
                       report.reviews, report.extractions);
  for (const auto& p : report.problems) c.out << "problem: " << p << '\n';
  for (const auto& o : report.orphans) c.out << "orphan: " << o << '\n';
  c.out << (report.ok ? "ok\n" : "corrupt\n");
  return report.ok ? kOk : kInputError;
}

// ---------------------------------------------------------------- import-results

struct ImportOptions {
  std::vector<std::string> paths;
};

ExtractionResult validated(ExtractionResult r, const Taxonomy& taxonomy, const Store& store) {
  const auto review = store.review(r.review_id);
  if (!review) throw Error(Errc::dangling_reference, "unknown review " + r.review_id);
  const auto body = text::nfc(review->body);
  for (auto& issue : r.issues) {
    const auto& category = taxonomy.category_of(issue.label).id;
    if (issue.category.empty()) issue.category = category;
    if (issue.category != category) {
      throw Error(Errc::malformed_structure,
                  fmt::format("{}: label {} belongs to {}, not {}", r.review_id, issue.label, category, issue.category));
    }
    if (issue.snippet.empty()) throw Error(Errc::empty_snippet, r.review_id + ": " + issue.label);
    if (body.find(issue.snippet) == std::string::npos) {
      throw Error(Errc::snippet_mismatch, r.review_id + ": " + issue.snippet);
    }
  }
  return r;
}

int cmd_import_results(const Context& c, const ImportOptions& o) {
  auto manifest = start_manifest("import-results");
  manifest.config_hash = config_hash({});
  Artifacts artifacts(c.g.out, manifest);
  auto [taxonomy, taxonomy_input] = load_taxonomy_input(c.g);
  manifest.taxonomy_version = taxonomy.version();
  manifest.inputs.push_back(taxonomy_input);

  auto store = Store::open(c.g.store, StoreMode::read_write);
  std::vector<ExtractionResult> results;
  std::set<std::string> extractors;
  for (const auto& path : o.paths) {
    const auto content = read_file(path);
    manifest.inputs.push_back({"results", path, sha256_hex(content)});
    std::istringstream lines(content);
    std::string line;
    for (std::size_t n = 1; std::getline(lines, line); ++n) {
      if (text::trim(line).empty()) continue;
      try {
        results.push_back(validated(decode_result(line), taxonomy, store));
      } catch (const Error& e) {
        throw Error(e.code(), fmt::format("{}:{}: {}", path, n, e.what()));
      }
      extractors.insert(results.back().extractor_id);
    }
  }
  if (results.empty()) throw EmptyData("no extraction results to import");
  const auto changed = store.put_extractions(results);
  if (extractors.size() == 1) manifest.extractor_id = *extractors.begin();
  manifest.summary = {{"read", std::to_string(results.size())}, {"stored", std::to_string(changed)}};
  c.out << fmt::format("imported {} results ({} new or changed)\n", results.size(), changed);
  artifacts.finish();
  return kOk;
}

CLI::Validator date_validator() {
  return CLI::Validator(
      [](std::string& s) -> std::string { return Date::parse(s) ? std::string() : "expected a YYYY-MM-DD date"; },
      "DATE");
}

void add_window(CLI::App* cmd, WindowOptions& w) {
  cmd->add_option("--from", w.from, "First review date included (YYYY-MM-DD)")->check(date_validator());
  cmd->add_option("--to", w.to, "Last review date included (YYYY-MM-DD)")->check(date_validator());
}

}  // namespace

int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_config:
    case Errc::authentication:
    case Errc::missing_golden:
      return kConfigError;
    case Errc::transport:
    case Errc::read_only:
    case Errc::granularity_mismatch:
      return kInternalError;
    default:
      return kInputError;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Aspect-level issue analytics for airline reviews", "airlens"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "Configuration file (TOML/INI); flags override it");
  app.require_subcommand(1);

  Context ctx{{}, out, err};
  auto& g = ctx.g;
  app.add_option("--store", g.store, "Store directory")->capture_default_str();
  app.add_option("--out", g.out, "Output directory for artifacts and manifests")->capture_default_str();
  app.add_option("--format", g.format, "Table format")
      ->check(CLI::IsMember({"csv", "markdown", "json"}))
      ->capture_default_str();
  app.add_option("--taxonomy", g.taxonomy, "Taxonomy document (default: bundled)");
  app.add_option("--region-map", g.region_map, "Region map document (default: bundled)");
  app.add_option("--lexicon", g.lexicon, "Lexicon document (default: bundled)");

  IngestOptions ingest_opts;
  auto* ingest = app.add_subcommand("ingest", "Parse review exports and load them into the store");
  ingest->add_option("paths", ingest_opts.paths, "JSONL or CSV files")->required();
  ingest->add_option("--input-format", ingest_opts.input_format, "jsonl or csv (default: from extension)")
      ->check(CLI::IsMember({"jsonl", "csv"}));
  ingest->add_option("--reject-report", ingest_opts.reject_report,
                     "Single reject report path (default: OUT/<input>.rejects.jsonl per input)");
  add_window(ingest, ingest_opts.window);

  FilterOptions filter_opts;
  auto* filter = app.add_subcommand("filter", "Export the diagnostic subset (low-rated reviews)");
  filter->add_option("--max-rating", filter_opts.max_rating, "Highest rating kept")
      ->check(CLI::Range(1, 5))
      ->capture_default_str();
  filter->add_option("--output", filter_opts.output, "Output file (default: OUT/filtered.jsonl)");
  filter->add_option("--output-format", filter_opts.output_format, "jsonl or csv")
      ->check(CLI::IsMember({"jsonl", "csv"}))
      ->capture_default_str();
  add_window(filter, filter_opts.window);

  ExtractOptions extract_opts;
  auto* extract_cmd = app.add_subcommand("extract", "Extract issues from filtered reviews");
  extract_cmd->add_option("--extractor", extract_opts.extractor, "provider, lexicon or recorded")
      ->check(CLI::IsMember({"provider", "lexicon", "recorded"}))
      ->capture_default_str();
  extract_cmd->add_option("--input", extract_opts.input, "Filtered dataset file (default: every stored review)");
  extract_cmd->add_flag("--filter", extract_opts.filter, "Apply the rating filter inline");
  extract_cmd->add_option("--goldens", extract_opts.goldens, "Golden response directory (recorded extractor)");
  extract_cmd->add_option("--endpoint", extract_opts.endpoint, "Chat-completions URL (provider extractor)");
  extract_cmd->add_option("--model", extract_opts.model, "Model name; also the extractor id");
  extract_cmd->add_option("--max-retries", extract_opts.max_retries)->check(CLI::Range(0, 10))->capture_default_str();
  extract_cmd->add_option("--concurrency", extract_opts.concurrency)->check(CLI::Range(1, 64))->capture_default_str();
  extract_cmd->add_option("--timeout", extract_opts.timeout, "Request timeout in seconds")
      ->check(CLI::Range(1, 600))
      ->capture_default_str();

  AnalyzeOptions analyze_opts;
  auto add_analysis_options = [](CLI::App* cmd, AnalyzeOptions& o) {
    add_window(cmd, o.window);
    cmd->add_option("--granularity", o.granularity, "year or quarter")
        ->check(CLI::IsMember({"year", "quarter"}))
        ->capture_default_str();
    cmd->add_option("--airline", o.airlines, "Restrict to these airlines");
    cmd->add_option("--extractor-id", o.extractor_id, "Use results of this extractor");
  };
  auto* analyze = app.add_subcommand("analyze", "Compute aggregates and write tables and plot data");
  analyze->add_option("which", analyze_opts.which, "Analysis to run")
      ->check(CLI::IsMember(
          {"frequency", "trajectory", "volume", "regions", "themes", "compare", "cooccurrence", "all"}))
      ->required();
  add_analysis_options(analyze, analyze_opts);
  analyze->add_option("--compare", analyze_opts.compare, "Airlines A B for the A minus B rating gap")
      ->expected(2);
  analyze->add_flag("--no-svg", analyze_opts.no_svg, "Skip static chart rendering");

  AnalyzeOptions report_opts;
  auto* report = app.add_subcommand("report", "Write a Markdown summary report");
  add_analysis_options(report, report_opts);

  auto* verify = app.add_subcommand("store-verify", "Check store integrity");

  ImportOptions import_opts;
  auto* import = app.add_subcommand("import-results", "Load extraction results (JSONL) into the store");
  import->add_option("paths", import_opts.paths, "Result files")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::FileError& e) {
    app.exit(e, out, err);
    return kConfigError;
  } catch (const CLI::ConfigError& e) {
    app.exit(e, out, err);
    return kConfigError;
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kInputError;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(ctx, ingest_opts);
    if (filter->parsed()) return cmd_filter(ctx, filter_opts);
    if (extract_cmd->parsed()) return cmd_extract(ctx, extract_opts);
    if (analyze->parsed()) return cmd_analyze(ctx, analyze_opts);
    if (report->parsed()) return cmd_report(ctx, report_opts);
    if (verify->parsed()) return cmd_store_verify(ctx);
    if (import->parsed()) return cmd_import_results(ctx, import_opts);
    return kInputError;
  } catch (const EmptyData& e) {
    err << "airlens: " << e.what() << '\n';
    return kEmptyData;
  } catch (const Error& e) {
    err << "airlens: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "airlens: internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace airlens::cli
