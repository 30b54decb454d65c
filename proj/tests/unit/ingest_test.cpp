#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "airlens/error.hpp"
#include "airlens/ingest.hpp"
#include "support.hpp"

using namespace airlens;
using namespace airlens::testing;

namespace {

std::string jsonl_row(const std::string& id, const std::string& airline, const std::string& rating,
                      const std::string& date, const std::string& body = "Fine.", const std::string& lang = "en") {
  return fmt::format(R"({{"review_id": "{}", "airline": "{}", "rating": {}, "title": "", "body": "{}", )"
                     R"("language": "{}", "review_date": "{}", "reviewer_origin": "", "route_from": "", )"
                     R"("route_to": ""}})",
                     id, airline, rating, body, lang, date) +
         "\n";
}

Dataset with_ratings(const std::vector<std::pair<int, int>>& histogram) {
  std::vector<ReviewRecord> records;
  int n = 0;
  for (const auto& [rating, count] : histogram) {
    for (int i = 0; i < count; ++i) {
      records.push_back(make_review(fmt::format("s{:03d}", n++), "egyptair", rating, Date{2020, 1 + n % 12, 1}));
    }
  }
  return make_dataset(std::move(records));
}

}  // namespace

TEST(Parse, ThreeValidRows) {
  const auto data = jsonl_row("a", "egyptair", "1", "2019-01-02") + jsonl_row("b", "emirates", "5", "2020-03-04") +
                    jsonl_row("c", "EgyptAir", "3", "2024-12-31", "Bad.", "AR");
  const auto out = parse_dataset(data, Format::jsonl);
  ASSERT_EQ(out.dataset.size(), 3u);
  EXPECT_TRUE(out.rejects.empty());
  EXPECT_EQ(out.dataset.records[2].airline, "egyptair");
  EXPECT_EQ(out.dataset.records[2].language, "ar");
  EXPECT_EQ(out.dataset.records[0].review_id, "a");
}

TEST(Parse, RejectReasons) {
  const auto data = jsonl_row("a", "egyptair", "6", "2019-01-02") + jsonl_row("b", "egyptair", "2.5", "2019-01-02") +
                    jsonl_row("c", "egyptair", "2", "2019-02-30") + jsonl_row("d", "egyptair", "2", "2015-12-31") +
                    jsonl_row("e", "egyptair", "2", "2019-01-02", "   ") + jsonl_row("f", "egyptair", "2", "2019-01-02", "ok", "e") +
                    "{broken\n" + "[1, 2]\n" + jsonl_row("g", "egyptair", "\"x\"", "2019-01-02") +
                    jsonl_row("h", "egyptair", "2", "2019-01-02");
  const auto out = parse_dataset(data, Format::jsonl);
  ASSERT_EQ(out.dataset.size(), 1u);
  EXPECT_EQ(out.dataset.records[0].review_id, "h");
  std::vector<std::string> reasons;
  std::vector<std::size_t> lines;
  for (const auto& r : out.rejects.rejects) {
    reasons.push_back(r.reason);
    lines.push_back(r.line);
  }
  EXPECT_EQ(reasons, (std::vector<std::string>{"rating_out_of_range", "rating_not_integer", "invalid_date",
                                               "date_out_of_window", "empty_body", "invalid_language",
                                               "malformed_row", "malformed_row", "rating_not_integer"}));
  EXPECT_EQ(lines, (std::vector<std::size_t>{1, 2, 3, 4, 5, 6, 7, 8, 9}));
  EXPECT_EQ(out.rejects.rejects[0].field, "rating");
}

TEST(Parse, EveryRowAccountedFor) {
  std::mt19937 rng(11);
  std::string data;
  std::size_t rows = 0;
  for (int i = 0; i < 300; ++i) {
    const int rating = static_cast<int>(rng() % 8);
    data += jsonl_row(fmt::format("id{}", i), "egyptair", std::to_string(rating), "2021-06-01");
    ++rows;
  }
  const auto out = parse_dataset(data, Format::jsonl);
  EXPECT_EQ(out.dataset.size() + out.rejects.size(), rows);
}

TEST(Parse, ProvenanceCountsForFullCorpusShape) {
  std::string data;
  for (int i = 0; i < 5171; ++i) data += jsonl_row(fmt::format("ea{}", i), "egyptair", "3", "2020-01-01");
  for (int i = 0; i < 11451; ++i) data += jsonl_row(fmt::format("ek{}", i), "emirates", "4", "2020-01-01");
  const auto out = parse_dataset(data, Format::jsonl);
  EXPECT_EQ(out.dataset.provenance.airline_counts.at("egyptair"), 5171u);
  EXPECT_EQ(out.dataset.provenance.airline_counts.at("emirates"), 11451u);
  const auto stats = dataset_stats(out.dataset);
  EXPECT_EQ(stats.total, 16622u);
  EXPECT_EQ(stats.per_airline.at("egyptair") + stats.per_airline.at("emirates"), 16622u);
}

TEST(Parse, StreamErrors) {
  try {
    parse_dataset("{\"body\": \"\xff\"}\n", Format::jsonl);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::undecodable_stream);
  }
  try {
    parse_format("xml");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unknown_format);
  }
  try {
    parse_dataset("airline,rating,body\negyptair,2,x\n", Format::csv);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::malformed_header);
  }
}

TEST(Parse, CsvQuotingAndLines) {
  const std::string data =
      "review_id,airline,rating,title,body,language,review_date,reviewer_origin,route_from,route_to\n"
      "x1,egyptair,2,,\"Late, again\",en,2022-01-01,\"Cairo, Egypt\",CAI,LHR\n"
      "x2,egyptair,9,,\"two\nlines\",en,2022-01-01,,,\n"
      "x3,emirates,4,\"He said \"\"fine\"\"\",\"multi\nline\nbody\",fr,2022-01-02,,,\n"
      "x4,emirates,4,,,en,2022-01-02,,,\n";
  const auto out = parse_dataset(data, Format::csv);
  ASSERT_EQ(out.dataset.size(), 2u);
  EXPECT_EQ(out.dataset.records[0].body, "Late, again");
  EXPECT_EQ(out.dataset.records[0].reviewer_origin, "Cairo, Egypt");
  EXPECT_EQ(out.dataset.records[0].route_from, "CAI");
  EXPECT_EQ(out.dataset.records[1].title, "He said \"fine\"");
  EXPECT_EQ(out.dataset.records[1].body, "multi\nline\nbody");
  ASSERT_EQ(out.rejects.size(), 2u);
  EXPECT_EQ(out.rejects.rejects[0].line, 3u);
  EXPECT_EQ(out.rejects.rejects[0].reason, "rating_out_of_range");
  EXPECT_EQ(out.rejects.rejects[1].line, 8u);
}

TEST(Parse, MissingIdGetsContentHash) {
  const std::string data =
      R"({"airline": "egyptair", "rating": 2, "body": "Same body", "language": "en", "review_date": "2020-01-01"})"
      "\n";
  const auto out = parse_dataset(data, Format::jsonl);
  ASSERT_EQ(out.dataset.size(), 1u);
  EXPECT_EQ(out.dataset.records[0].review_id, content_review_id("egyptair", Date{2020, 1, 1}, "Same body"));
  EXPECT_EQ(out.dataset.records[0].review_id.rfind("h:", 0), 0u);
}

TEST(ParseFiles, MergesInPathOrderAndReportsIo) {
  TempDir dir;
  {
    std::ofstream(dir / "b.jsonl") << jsonl_row("b1", "egyptair", "2", "2020-01-01");
    std::ofstream(dir / "a.jsonl") << jsonl_row("a1", "egyptair", "2", "2020-01-01")
                                   << jsonl_row("a2", "egyptair", "2", "2020-01-01");
  }
  const auto out = parse_files({dir / "b.jsonl", dir / "a.jsonl"}, Format::jsonl);
  ASSERT_EQ(out.dataset.size(), 3u);
  EXPECT_EQ(out.dataset.records[0].review_id, "a1");
  EXPECT_EQ(out.dataset.records[2].review_id, "b1");
  try {
    parse_files({dir / "missing.jsonl"}, Format::jsonl);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::io);
  }
}

TEST(Deduplicate, Examples) {
  auto ds = make_dataset({make_review("a", "egyptair", 1, {2020, 1, 1}), make_review("a", "egyptair", 2, {2021, 1, 1}),
                          make_review("b", "egyptair", 3, {2020, 1, 1})});
  auto [out, dropped] = deduplicate(ds);
  EXPECT_EQ(out.size(), 2u);
  EXPECT_EQ(dropped, 1u);
  EXPECT_EQ(out.records[0].rating, 1);

  auto [same, none] = deduplicate(out);
  EXPECT_EQ(same.records, out.records);
  EXPECT_EQ(none, 0u);
}

TEST(Deduplicate, ContentHashKeysAgreeWithPairwiseComparison) {
  // Rows without ids: identical (airline, date, body) collapse; anything else survives.
  std::vector<std::tuple<std::string, std::string, std::string>> rows{
      {"egyptair", "2020-01-01", "Same body"}, {"egyptair", "2020-01-02", "Same body"},
      {"egyptair", "2020-01-01", "Same body"}, {"emirates", "2020-01-01", "Same body"},
      {"egyptair", "2020-01-01", "Other body"}};
  std::string data;
  for (const auto& [airline, date, body] : rows) {
    data += fmt::format(R"({{"airline": "{}", "rating": 2, "body": "{}", "language": "en", "review_date": "{}"}})",
                        airline, body, date) +
            "\n";
  }
  const auto parsed = parse_dataset(data, Format::jsonl);
  auto [out, dropped] = deduplicate(parsed.dataset);
  std::size_t expected_kept = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    bool seen = false;
    for (std::size_t j = 0; j < i; ++j) seen = seen || rows[i] == rows[j];
    if (!seen) ++expected_kept;
  }
  EXPECT_EQ(out.size(), expected_kept);
  EXPECT_EQ(dropped, rows.size() - expected_kept);
}

TEST(DiagnosticFilter, Examples) {
  const auto ds = make_dataset({make_review("a", "egyptair", 3, {2020, 1, 1}),
                                make_review("b", "egyptair", 4, {2020, 1, 1})});
  const auto out = diagnostic_filter(ds);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.records[0].review_id, "a");
  EXPECT_TRUE(diagnostic_filter(Dataset{}).empty());
  for (int bad : {0, 6}) {
    try {
      diagnostic_filter(ds, bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::invalid_rating_band);
    }
  }
}

TEST(DiagnosticFilter, KnownHistogram) {
  const auto ds = with_ratings({{1, 10}, {2, 20}, {3, 30}, {4, 25}, {5, 15}});
  ASSERT_EQ(ds.size(), 100u);
  std::size_t brute = 0;
  for (const auto& r : ds.records) brute += r.rating <= 3;
  const auto out = diagnostic_filter(ds, 3);
  EXPECT_EQ(out.size(), brute);
  EXPECT_EQ(out.size(), 60u);
}

TEST(WindowFilter, Examples) {
  const auto ds = make_dataset({make_review("old", "egyptair", 2, {2016, 5, 1}),
                                make_review("mid", "egyptair", 2, {2020, 6, 15}),
                                make_review("new", "egyptair", 2, {2025, 3, 31})});
  EXPECT_EQ(window_filter(ds, kCorpusStart, kCorpusEnd).records, ds.records);
  const auto recent = window_filter(ds, {2019, 1, 1}, {2025, 3, 31});
  EXPECT_EQ(recent.size(), 2u);
  EXPECT_TRUE(std::none_of(recent.records.begin(), recent.records.end(),
                           [](const auto& r) { return r.review_id == "old"; }));
  const auto day = window_filter(ds, {2020, 6, 15}, {2020, 6, 15});
  ASSERT_EQ(day.size(), 1u);
  EXPECT_EQ(day.records[0].review_id, "mid");
  try {
    window_filter(ds, {2021, 1, 1}, {2020, 1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::inverted_range);
  }
}

TEST(DatasetStats, Examples) {
  const auto empty = dataset_stats(Dataset{});
  EXPECT_EQ(empty.total, 0u);
  EXPECT_TRUE(empty.per_airline.empty());
  const auto ds = make_dataset({make_review("a", "egyptair", 1, {2020, 1, 1}, "x", "en"),
                                make_review("b", "egyptair", 2, {2021, 1, 1}, "x", "ar"),
                                make_review("c", "emirates", 2, {2021, 1, 1}, "x", "en")});
  const auto s = dataset_stats(ds);
  EXPECT_EQ(s.per_language, (std::map<std::string, std::size_t>{{"ar", 1}, {"en", 2}}));
  EXPECT_EQ(s.per_year, (std::map<int, std::size_t>{{2020, 1}, {2021, 2}}));
  EXPECT_EQ(s.rating_histogram, (std::array<std::size_t, 5>{1, 2, 0, 0, 0}));
}

TEST(IngestProperty, FiltersCommuteAndAreIdempotent) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ds = random_dataset(rng, rng() % 60);
    const int max_rating = 1 + static_cast<int>(rng() % 5);
    Date from{2016 + static_cast<int>(rng() % 10), 1 + static_cast<int>(rng() % 12), 1};
    Date to{from.year + static_cast<int>(rng() % 3), 12, 31};
    const auto a = diagnostic_filter(window_filter(ds, from, to), max_rating);
    const auto b = window_filter(diagnostic_filter(ds, max_rating), from, to);
    EXPECT_EQ(a.records, b.records);
    const auto once = diagnostic_filter(ds, max_rating);
    EXPECT_EQ(diagnostic_filter(once, max_rating).records, once.records);
    EXPECT_LE(once.size(), ds.size());
    for (const auto& r : a.records) {
      EXPECT_NE(std::find(ds.records.begin(), ds.records.end(), r), ds.records.end());
    }
  }
}

TEST(IngestProperty, SerializeParseRoundTrip) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const auto ds = random_dataset(rng, 1 + rng() % 40);
    for (auto format : {Format::jsonl, Format::csv}) {
      const auto text = serialize_dataset(ds, format);
      const auto back = parse_dataset(text, format);
      EXPECT_TRUE(back.rejects.empty()) << to_string(format);
      EXPECT_EQ(back.dataset.records, ds.records) << to_string(format);
      EXPECT_EQ(serialize_dataset(back.dataset, format), text);
    }
  }
}

TEST(RejectReport, OneJsonLinePerReject) {
  const auto out = parse_dataset(jsonl_row("a", "egyptair", "6", "2019-01-02") + "{bad\n", Format::jsonl);
  const auto text = reject_report_jsonl(out.rejects);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_NE(text.find("rating_out_of_range"), std::string::npos);
}
