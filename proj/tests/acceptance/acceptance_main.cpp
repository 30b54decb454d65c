// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "../oracle.hpp"
#include "../support.hpp"
#include "airlens/analytics.hpp"
#include "airlens/cli.hpp"
#include "airlens/extraction.hpp"
#include "airlens/ingest.hpp"
#include "airlens/providers.hpp"
#include "airlens/region_map.hpp"
#include "airlens/store.hpp"
#include "airlens/taxonomy.hpp"

using namespace airlens;
using namespace airlens::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Collects failure messages for one criterion.
struct Check {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int run_cli(const std::vector<std::string>& args, std::string* err_out = nullptr) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  if (err_out) *err_out = err.str();
  return code;
}

std::vector<ExtractedReview> join(const Dataset& ds, const std::vector<ExtractionResult>& results) {
  std::map<std::string, ReviewRecord> by_id;
  for (const auto& r : ds.records) by_id[r.review_id] = r;
  std::vector<ExtractedReview> out;
  for (const auto& res : results) out.push_back({by_id.at(res.review_id), res});
  return out;
}

Dataset airline_only(const Dataset& ds, const std::string& airline) {
  std::vector<ReviewRecord> out;
  for (const auto& r : ds.records) {
    if (r.airline == airline) out.push_back(r);
  }
  return make_dataset(std::move(out));
}

// Published per-issue frequencies, keyed by issue display name and
// macro-category display name.
struct PublishedRow {
  const char* category;
  const char* issue;
  long count;
};

const std::vector<PublishedRow>& published_counts() {
  static const std::vector<PublishedRow> rows{
      {"Flight Disruptions", "Flight Delays/Cancellations", 690},
      {"Flight Disruptions", "Poor Communication Regarding Delay", 536},
      {"Flight Disruptions", "Unexplained Cancellation", 94},
      {"Flight Disruptions", "Missed Connection", 92},
      {"Flight Disruptions", "Excessive Flight Delay", 73},
      {"Flight Disruptions", "Inadequate Pre-Flight Communication", 24},
      {"Flight Disruptions", "Unclear Announcements", 1},
      {"Customer Service", "Rude Flight Attendants", 591},
      {"Customer Service", "Poor Customer Service", 475},
      {"Customer Service", "Unresponsive Crew", 346},
      {"Customer Service", "Lack of Assistance", 194},
      {"Customer Service", "Unhelpful Phone Support", 92},
      {"In-Flight Experience", "Poor Food Quality", 555},
      {"In-Flight Experience", "Lack of Amenities", 442},
      {"In-Flight Experience", "Uncomfortable Seating", 288},
      {"In-Flight Experience", "Seat Assignment Problems", 131},
      {"In-Flight Experience", "Broken Seats", 107},
      {"In-Flight Experience", "Broken Entertainment System", 81},
      {"In-Flight Experience", "In-Flight Experience (General)", 66},
      {"In-Flight Experience", "Lack of Legroom", 12},
      {"In-Flight Experience", "Seat Issues", 5},
      {"In-Flight Experience", "Poor Entertainment", 1},
      {"Baggage Handling", "Lost Baggage", 335},
      {"Baggage Handling", "Damaged Baggage", 111},
      {"Baggage Handling", "Delayed Baggage", 41},
      {"Baggage Handling", "Baggage Handling Fees", 28},
      {"Baggage Handling", "Baggage Handling (General)", 2},
      {"Cleanliness", "Dirty Cabin", 280},
      {"Cleanliness", "Unclean Restrooms", 102},
      {"Cleanliness", "Cleanliness (General)", 2},
      {"Safety Concerns", "Lack of Safety Enforcement", 130},
      {"Airport Services", "Disorganized Boarding", 72},
      {"Airport Services", "Disorganized Airport Staff", 44},
      {"Booking Issues", "Difficult Booking Process", 46},
      {"Booking Issues", "Website Issues", 37},
  };
  return rows;
}

void frequency_reproduction(Check& c) {
  TempDir dir;
  const auto store = (dir / "store").string();
  const auto out = dir / "out";
  const auto start = Clock::now();
  c.expect(run_cli({"--store", store, "--out", out.string(), "ingest",
                    (fixtures_dir() / "frequency/reviews.jsonl").string()}) == 0,
           "ingest failed");
  c.expect(run_cli({"--store", store, "--out", out.string(), "import-results",
                    (fixtures_dir() / "frequency/results.jsonl").string()}) == 0,
           "import-results failed");
  c.expect(run_cli({"--store", store, "--out", out.string(), "--format", "csv", "analyze", "frequency"}) == 0,
           "analyze frequency failed");
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 5.0, "runtime " + std::to_string(elapsed) + " s");

  std::map<std::string, long> got;
  std::istringstream csv(read_text(out / "frequency.csv"));
  std::string line;
  std::getline(csv, line);
  c.expect(line == "label,category,count", "header " + line);
  std::string first_row;
  while (std::getline(csv, line)) {
    if (first_row.empty()) first_row = line;
    const auto a = line.find(',');
    const auto b = line.rfind(',');
    got[line.substr(0, a)] = std::stol(line.substr(b + 1));
  }
  c.expect(first_row == "flight_delays_cancellations,flight_disruptions,690", "first row " + first_row);

  const auto& t = default_taxonomy();
  c.expect(got.size() == published_counts().size(), "row count " + std::to_string(got.size()));
  std::map<std::string, long> derived_categories;
  for (const auto& row : published_counts()) {
    const auto resolved = t.resolve_label(row.issue);
    const auto* label = std::get_if<IssueLabel>(&resolved);
    if (!label) {
      c.expect(false, std::string("unresolved ") + row.issue);
      continue;
    }
    c.expect(t.category(label->category).display_name == row.category, std::string("category of ") + row.issue);
    c.expect(got[label->id] == row.count, std::string("count of ") + row.issue);
    derived_categories[label->category] += row.count;
  }

  std::map<std::string, long> got_categories;
  std::istringstream cats(read_text(out / "frequency_categories.csv"));
  std::getline(cats, line);
  while (std::getline(cats, line)) {
    got_categories[line.substr(0, line.find(','))] = std::stol(line.substr(line.rfind(',') + 1));
  }
  c.expect(got_categories == derived_categories, "category totals differ from summed rows");
  const std::map<std::string, long> quoted{{"flight_disruptions", 1510}, {"customer_service", 1698},
                                           {"in_flight_experience", 1688}, {"baggage_handling", 517},
                                           {"cleanliness", 384},         {"safety_concerns", 130},
                                           {"airport_services", 116},    {"booking_issues", 83}};
  c.expect(got_categories == quoted, "category totals differ from quoted values");
}

void stage1_filter(Check& c) {
  const auto start = Clock::now();
  std::vector<ReviewRecord> records;
  const std::map<int, int> histogram{{1, 10}, {2, 20}, {3, 30}, {4, 25}, {5, 15}};
  int i = 0;
  for (const auto& [rating, n] : histogram) {
    for (int k = 0; k < n; ++k, ++i) {
      records.push_back(make_review("f" + std::to_string(i), i % 2 ? "egyptair" : "emirates", rating,
                                    {2016 + i % 9, 1 + i % 12, 1 + i % 28}));
    }
  }
  const auto ds = make_dataset(std::move(records));
  const auto once = diagnostic_filter(ds);
  const auto twice = diagnostic_filter(once);
  c.expect(once.records.size() == 60, "kept " + std::to_string(once.records.size()));
  c.expect(twice.records == once.records, "not idempotent");
  for (const auto& r : once.records) c.expect(r.rating <= 3, "kept rating " + std::to_string(r.rating));
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 1.0, "runtime " + std::to_string(elapsed) + " s");
}

void worked_example(Check& c) {
  const auto review = decode_review(json::parse(read_text(fixtures_dir() / "worked_example/review.json")).dump());
  const auto raw = read_text(fixtures_dir() / "worked_example/golden/worked-example.json");
  const auto parsed = parse_model_response(raw, default_taxonomy(), review, "golden");
  const auto* result = std::get_if<ExtractionResult>(&parsed);
  if (!result) {
    c.expect(false, "golden rejected: " + std::string(to_string(std::get<ValidationError>(parsed).code)));
    return;
  }
  const std::vector<std::pair<std::string, std::string>> expected{
      {"Poor Communication Regarding Delay", "Flight Disruptions"},
      {"Broken Seats", "In-Flight Experience"},
      {"Poor Food Quality", "In-Flight Experience"}};
  c.expect(result->issues.size() == 3, "issue count " + std::to_string(result->issues.size()));
  for (std::size_t i = 0; i < std::min(expected.size(), result->issues.size()); ++i) {
    const auto& issue = result->issues[i];
    const auto& label = default_taxonomy().label(issue.label);
    c.expect(label.display_name == expected[i].first, "label " + issue.label);
    c.expect(default_taxonomy().category(issue.category).display_name == expected[i].second,
             "category " + issue.category);
    c.expect(review.body.find(issue.snippet) != std::string::npos, "snippet not in body: " + issue.snippet);
  }
}

void trajectory(Check& c) {
  const auto start = Clock::now();
  const auto ds = airline_only(load_fixture("trajectory/reviews.jsonl"), "egyptair");
  const auto years = rating_trajectory(ds, Granularity::year);
  const auto quarters = rating_trajectory(ds, Granularity::quarter);
  bool saw_2019 = false;
  bool saw_2024 = false;
  for (const auto& p : years.points) {
    if (!p.mean_rating) continue;
    const double m = *p.mean_rating;
    if (p.bucket.year == 2019) {
      saw_2019 = true;
      c.expect(std::fabs(m - 3.27) <= 0.005, "2019 mean " + std::to_string(m));
    }
    if (p.bucket.year >= 2022) c.expect(m < 2.0, p.bucket.key() + " mean " + std::to_string(m));
    if (p.bucket.year == 2024) {
      saw_2024 = true;
      c.expect(std::fabs(m - 1.6) <= 0.05, "2024 mean " + std::to_string(m));
    }
    double weighted = 0.0;
    std::int64_t n = 0;
    for (const auto& q : quarters.points) {
      if (q.bucket.year != p.bucket.year || !q.mean_rating) continue;
      weighted += *q.mean_rating * static_cast<double>(q.count);
      n += q.count;
    }
    c.expect(n == p.count && std::fabs(weighted / static_cast<double>(n) - m) <= 1e-9,
             "weighted mean mismatch in " + p.bucket.key());
  }
  c.expect(saw_2019 && saw_2024, "missing 2019 or 2024 bucket");
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 2.0, "runtime " + std::to_string(elapsed) + " s");
}

void regions(Check& c) {
  const auto start = Clock::now();
  const auto& map = default_region_map();
  const auto egyptair = region_segmentation(load_fixture("regions/egyptair.jsonl"), map);
  bool saw_gcc = false;
  for (const auto& a : egyptair) {
    if (a.region == "gcc") {
      saw_gcc = true;
      c.expect(std::fabs(a.mean_rating - 1.2) <= 0.05, "gcc mean " + std::to_string(a.mean_rating));
    }
  }
  c.expect(saw_gcc, "no gcc aggregate");
  const auto emirates = region_segmentation(load_fixture("regions/emirates.jsonl"), map);
  std::size_t inside = 0;
  for (const auto& a : emirates) {
    c.expect(a.mean_rating >= 2.3, a.region + " below floor: " + std::to_string(a.mean_rating));
    inside += a.mean_rating >= 3.0 && a.mean_rating <= 3.8;
  }
  c.expect(!emirates.empty() && inside * 2 > emirates.size(), "most regions not within [3.0, 3.8]");
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 2.0, "runtime " + std::to_string(elapsed) + " s");
}

void robustness(Check& c) {
  const auto& t = default_taxonomy();
  const auto review = decode_review(json::parse(read_text(fixtures_dir() / "worked_example/review.json")).dump());
  const auto expected = json::parse(read_text(fixtures_dir() / "bad_responses/expected.json"));
  c.expect(expected.size() == 4, "bad corpus size");
  for (const auto& [file, code] : expected.items()) {
    const auto parsed = parse_model_response(read_text(fixtures_dir() / "bad_responses" / file), t, review);
    const auto* err = std::get_if<ValidationError>(&parsed);
    c.expect(err && to_string(err->code) == code.get<std::string>(), file + " did not yield " + code.get<std::string>());
  }

  const auto golden = read_text(fixtures_dir() / "worked_example/golden/worked-example.json");
  ExtractorConfig cfg;
  cfg.model = "scripted";
  cfg.max_retries = 2;
  const std::vector<std::pair<std::deque<ScriptedProviderClient::Step>, std::pair<ExtractionStatus, int>>> cases{
      {{golden}, {ExtractionStatus::ok, 1}},
      {{std::string("oops"), golden}, {ExtractionStatus::ok, 2}},
      {{std::string("oops"), std::string("[{}]"), std::string("[1]")}, {ExtractionStatus::failed, 3}},
  };
  for (const auto& [steps, want] : cases) {
    ScriptedProviderClient client;
    client.script(review.review_id, steps);
    const auto r = extract(review, client, cfg, t);
    c.expect(r.status == want.first && r.attempts == want.second,
             "attempts " + std::to_string(r.attempts) + ", expected " + std::to_string(want.second));
    c.expect(client.requests() == static_cast<std::size_t>(want.second), "request count");
  }
}

void oracle_equivalence(Check& c) {
  const auto start = Clock::now();
  std::mt19937 rng(20250101);
  const auto& t = default_taxonomy();
  for (int corpus = 0; corpus < 200; ++corpus) {
    const auto ds = random_dataset(rng, rng() % 51, "c" + std::to_string(corpus) + "-");
    const auto results = oracle::random_results(rng, ds, t);
    for (const auto& m : oracle::mismatches(ds, results, t, default_region_map())) {
      c.expect(false, "corpus " + std::to_string(corpus) + ": " + m);
    }
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 30.0, "runtime " + std::to_string(elapsed) + " s");
}

// Every file under `root`, with timestamps dropped from run manifests.
std::map<std::string, std::string> artifact_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root).string();
    auto bytes = read_text(e.path());
    if (e.path().filename().string().rfind("manifest.", 0) == 0) {
      auto doc = json::parse(bytes);
      doc.erase("started_at");
      doc.erase("finished_at");
      bytes = doc.dump();
    }
    out[rel] = std::move(bytes);
  }
  return out;
}

void determinism(Check& c) {
  TempDir dir;
  const auto store = (dir / "store").string();
  const auto out = (dir / "out").string();
  auto pipeline = [&] {
    fs::remove_all(store);
    fs::remove_all(out);
    const std::vector<std::vector<std::string>> steps{
        {"ingest", (fixtures_dir() / "pipeline/reviews.jsonl").string(),
         (fixtures_dir() / "pipeline/reviews.csv").string()},
        {"filter"},
        {"extract", "--extractor", "lexicon", "--input", out + "/filtered.jsonl"},
        {"analyze", "all"},
    };
    for (const auto& step : steps) {
      std::vector<std::string> args{"--store", store, "--out", out};
      args.insert(args.end(), step.begin(), step.end());
      std::string err;
      const int code = run_cli(args, &err);
      c.expect(code == 0, step.front() + " exited " + std::to_string(code) + ": " + err);
    }
    return artifact_bytes(out);
  };
  const auto first = pipeline();
  const auto second = pipeline();
  c.expect(first.size() > 10, "only " + std::to_string(first.size()) + " artifacts");
  c.expect(first.size() == second.size(), "artifact sets differ");
  for (const auto& [rel, bytes] : first) {
    auto it = second.find(rel);
    c.expect(it != second.end() && it->second == bytes, rel + " differs between runs");
  }
}

void resume(Check& c) {
  const auto& t = default_taxonomy();
  const std::string answer = R"([{"label": "poor_food_quality", "snippet": "food was cold"}])";
  constexpr std::size_t n = 40;
  for (std::size_t k : {std::size_t{0}, std::size_t{1}, std::size_t{13}, std::size_t{39}}) {
    TempDir dir;
    auto store = Store::open(dir / "store", StoreMode::read_write, {.sync = false});
    std::vector<ReviewRecord> records;
    for (std::size_t i = 0; i < n; ++i) {
      records.push_back(make_review("r" + std::to_string(i), "egyptair", 1 + static_cast<int>(i % 3),
                                    {2023, 1 + static_cast<int>(i % 12), 1}, "The food was cold."));
    }
    const auto ds = make_dataset(std::move(records));
    store.put_reviews(ds);
    ExtractorConfig cfg;
    cfg.model = "scripted";
    cfg.concurrency_limit = 4;

    ScriptedProviderClient interrupted;
    interrupted.set_fallback(answer);
    interrupted.fail_after(k);
    bool aborted = false;
    try {
      extract_batch(ds, interrupted, cfg, t, store);
    } catch (const Error&) {
      aborted = true;
    }
    c.expect(aborted, "run with k=" + std::to_string(k) + " was not interrupted");
    const auto done = store.checkpoint_state("scripted").size();
    c.expect(done == k, "k=" + std::to_string(k) + ": " + std::to_string(done) + " results persisted");

    ScriptedProviderClient rerun;
    rerun.set_fallback(answer);
    extract_batch(ds, rerun, cfg, t, store);
    c.expect(rerun.requests() == n - k,
             "k=" + std::to_string(k) + ": rerun issued " + std::to_string(rerun.requests()) + " requests");
    c.expect(store.checkpoint_state("scripted").size() == n, "rerun incomplete");
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"1 frequency table reproduction", frequency_reproduction},
      {"2 diagnostic filter", stage1_filter},
      {"3 worked example conformance", worked_example},
      {"4 trajectory calibration", trajectory},
      {"5 region calibration", regions},
      {"6 extraction robustness", robustness},
      {"7 oracle equivalence", oracle_equivalence},
      {"8 offline determinism", determinism},
      {"9 resume safety", resume},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    if (c.failures.empty()) {
      std::cout << "PASS  " << name << '\n';
    } else {
      ++failed;
      std::cout << "FAIL  " << name << ": " << c.failures.front();
      if (c.failures.size() > 1) std::cout << " (+" << c.failures.size() - 1 << " more)";
      std::cout << '\n';
    }
  }
  return failed == 0 ? 0 : 1;
}
