#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <unistd.h>

#include "airlens/extraction_result.hpp"
#include "airlens/ingest.hpp"

namespace airlens::testing {

inline std::filesystem::path fixtures_dir() { return AIRLENS_FIXTURES_DIR; }

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            fmt::format("airlens-test-{}-{}-{}", ::getpid(), stamp, counter++);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline ReviewRecord make_review(std::string id, std::string airline, int rating, Date date,
                                std::string body = "A review body.", std::string language = "en",
                                std::string origin = "") {
  ReviewRecord r;
  r.review_id = std::move(id);
  r.airline = std::move(airline);
  r.rating = rating;
  r.body = std::move(body);
  r.language = std::move(language);
  r.review_date = date;
  r.reviewer_origin = std::move(origin);
  return r;
}

inline Dataset load_fixture(const std::string& rel) {
  auto outcome = parse_files({fixtures_dir() / rel}, Format::jsonl);
  return outcome.dataset;
}

inline std::vector<ExtractionResult> load_results(const std::string& rel) {
  std::vector<ExtractionResult> out;
  std::istringstream lines(read_text(fixtures_dir() / rel));
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty()) out.push_back(decode_result(line));
  }
  return out;
}

// Random valid records; bodies include characters that stress CSV quoting.
inline Dataset random_dataset(std::mt19937& rng, std::size_t n, const std::string& id_prefix = "r") {
  static const std::vector<std::string> airlines{"egyptair", "emirates", "flydubai"};
  static const std::vector<std::string> languages{"en", "ar", "fr", "de", "pt-br"};
  static const std::vector<std::string> origins{"",           "Riyadh, Saudi Arabia", "London, UK", "Mumbai, India",
                                                "Lagos",      "Warsaw, Poland",       "Toronto, Canada",
                                                "Atlantis"};
  static const std::vector<std::string> pieces{"late", "seat, broken", "\"quoted\"", "multi\nline", "تأخرت",
                                               "café",  "ok",          "  padded ",    "semi;colon"};
  std::vector<ReviewRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    ReviewRecord r;
    r.review_id = fmt::format("{}{:04d}", id_prefix, i);
    r.airline = airlines[rng() % airlines.size()];
    r.rating = static_cast<int>(1 + rng() % 5);
    r.title = rng() % 2 ? "" : pieces[rng() % pieces.size()];
    r.body = "body " + pieces[rng() % pieces.size()] + " " + pieces[rng() % pieces.size()];
    r.language = languages[rng() % languages.size()];
    const int year = 2016 + static_cast<int>(rng() % 10);
    const int month = year == 2025 ? 1 + static_cast<int>(rng() % 3) : 1 + static_cast<int>(rng() % 12);
    r.review_date = Date{year, month, 1 + static_cast<int>(rng() % 28)};
    r.reviewer_origin = origins[rng() % origins.size()];
    if (rng() % 3 == 0) {
      r.route_from = "CAI";
      r.route_to = "DXB";
    }
    records.push_back(std::move(r));
  }
  return make_dataset(std::move(records));
}

}  // namespace airlens::testing
