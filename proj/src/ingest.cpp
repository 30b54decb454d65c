#include "airlens/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <future>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_set>
#include <variant>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>

#include "airlens/error.hpp"
#include "airlens/hash.hpp"
#include "airlens/text.hpp"

namespace airlens {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 10> kColumns = {
    "review_id", "airline", "rating", "title", "body", "language", "review_date", "reviewer_origin", "route_from",
    "route_to"};
constexpr std::array<std::string_view, 5> kRequiredColumns = {"airline", "rating", "body", "language",
                                                              "review_date"};

// A row reduced to "field present with this text" / "field absent", so JSONL
// and CSV share one validator. Ratings keep their raw lexical form.
struct RawRow {
  std::map<std::string, std::string, std::less<>> fields;
  std::optional<std::string> type_error;  // field with a non-string/non-number JSON value
  bool rating_is_float = false;
};

struct RowError {
  std::string reason;
  std::string field;
  std::string detail;
};

bool is_token(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

bool is_language_tag(std::string_view s) {
  // lang[-subtag]*, lang 2..8 letters, subtags 1..8 alphanumerics
  std::size_t pos = 0;
  bool first = true;
  while (true) {
    auto dash = s.find('-', pos);
    auto part = s.substr(pos, dash == std::string_view::npos ? std::string_view::npos : dash - pos);
    const auto min_len = first ? 2u : 1u;
    if (part.size() < min_len || part.size() > 8) return false;
    for (char c : part) {
      const bool alpha = (c >= 'a' && c <= 'z');
      const bool digit = (c >= '0' && c <= '9');
      if (!(alpha || (!first && digit))) return false;
    }
    if (dash == std::string_view::npos) return true;
    pos = dash + 1;
    first = false;
  }
}

bool is_opaque_id(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return static_cast<unsigned char>(c) > 0x20 && c != 0x7F;
  });
}

std::optional<std::string> field(const RawRow& row, std::string_view name) {
  auto it = row.fields.find(name);
  if (it == row.fields.end()) return std::nullopt;
  return it->second;
}

std::variant<ReviewRecord, RowError> validate_row(const RawRow& row, const ParseOptions& options) {
  if (row.type_error) return RowError{"invalid_field_type", *row.type_error, "unexpected JSON type"};
  for (auto name : kRequiredColumns) {
    if (!field(row, name)) return RowError{"missing_field", std::string(name), ""};
  }

  ReviewRecord r;
  r.airline = text::ascii_lower(text::trim(*field(row, "airline")));
  if (!is_token(r.airline)) return RowError{"invalid_airline", "airline", r.airline};

  const auto rating_text = std::string(text::trim(*field(row, "rating")));
  if (row.rating_is_float || rating_text.find_first_of(".eE") != std::string::npos) {
    return RowError{"rating_not_integer", "rating", rating_text};
  }
  {
    if (rating_text.empty()) return RowError{"missing_field", "rating", ""};
    long long value = 0;
    std::size_t i = rating_text[0] == '-' || rating_text[0] == '+' ? 1 : 0;
    if (i == rating_text.size()) return RowError{"rating_not_integer", "rating", rating_text};
    for (; i < rating_text.size(); ++i) {
      const char c = rating_text[i];
      if (c < '0' || c > '9') return RowError{"rating_not_integer", "rating", rating_text};
      value = std::min<long long>(value * 10 + (c - '0'), 1000);
    }
    if (rating_text[0] == '-') value = -value;
    if (value < 1 || value > 5) return RowError{"rating_out_of_range", "rating", rating_text};
    r.rating = static_cast<int>(value);
  }

  r.body = *field(row, "body");
  if (text::trim(r.body).empty()) return RowError{"empty_body", "body", ""};
  r.title = field(row, "title").value_or("");

  r.language = text::ascii_lower(text::trim(*field(row, "language")));
  if (!is_language_tag(r.language)) return RowError{"invalid_language", "language", r.language};

  const auto date_text = std::string(text::trim(*field(row, "review_date")));
  auto date = Date::parse(date_text);
  if (!date) return RowError{"invalid_date", "review_date", date_text};
  if (!options.window.contains(*date)) return RowError{"date_out_of_window", "review_date", date_text};
  r.review_date = *date;

  r.reviewer_origin = std::string(text::trim(field(row, "reviewer_origin").value_or("")));

  for (auto [name, out] : {std::pair{"route_from", &r.route_from}, std::pair{"route_to", &r.route_to}}) {
    auto code = std::string(text::trim(field(row, name).value_or("")));
    if (code.empty()) continue;
    if (code.size() != 3 || !std::all_of(code.begin(), code.end(), [](char c) {
          return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
        })) {
      return RowError{"invalid_route", name, code};
    }
    for (auto& c : code) c = static_cast<char>(c >= 'a' ? c - 'a' + 'A' : c);
    *out = std::move(code);
  }

  auto id = std::string(text::trim(field(row, "review_id").value_or("")));
  if (id.empty()) {
    id = content_review_id(r.airline, r.review_date, r.body);
  } else if (!is_opaque_id(id)) {
    return RowError{"invalid_review_id", "review_id", id};
  }
  r.review_id = std::move(id);
  return r;
}

std::string now_utc() {
  auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", now);
}

void parse_jsonl(std::string_view data, const ParseOptions& options, ParseOutcome& out) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < data.size()) {
    auto nl = data.find('\n', pos);
    auto line = data.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? data.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;

    auto reject = [&](RowError e) {
      out.rejects.rejects.push_back({options.source_name, line_no, std::move(e.reason), std::move(e.field),
                                     std::move(e.detail)});
    };
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      reject({"malformed_row", "", e.what()});
      continue;
    }
    if (!obj.is_object()) {
      reject({"malformed_row", "", "row is not a JSON object"});
      continue;
    }
    RawRow row;
    for (auto name : kColumns) {
      auto it = obj.find(name);
      if (it == obj.end() || it->is_null()) continue;
      if (it->is_string()) {
        row.fields.emplace(name, it->get<std::string>());
      } else if (it->is_number_integer() && (name == "rating")) {
        row.fields.emplace(name, it->dump());
      } else if (it->is_number_float() && name == "rating") {
        row.fields.emplace(name, it->dump());
        row.rating_is_float = true;
      } else if (!row.type_error) {
        row.type_error = std::string(name);
      }
    }
    auto result = validate_row(row, options);
    if (auto* e = std::get_if<RowError>(&result)) {
      reject(std::move(*e));
    } else {
      out.dataset.records.push_back(std::move(std::get<ReviewRecord>(result)));
    }
  }
}

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> cells;
  std::optional<std::string> error;
};

// RFC 4180 reader: comma separator, double-quote quoting, "" escapes,
// CRLF or LF record terminators, quoted fields may span lines.
std::vector<CsvRow> read_csv(std::string_view data) {
  std::vector<CsvRow> rows;
  std::size_t i = 0;
  std::size_t line = 1;
  while (i < data.size()) {
    CsvRow row;
    row.line = line;
    std::string cell;
    bool done = false;
    while (!done) {
      cell.clear();
      if (i < data.size() && data[i] == '"') {
        ++i;
        bool closed = false;
        while (i < data.size()) {
          const char c = data[i++];
          if (c == '"') {
            if (i < data.size() && data[i] == '"') {
              cell.push_back('"');
              ++i;
            } else {
              closed = true;
              break;
            }
          } else {
            if (c == '\n') ++line;
            cell.push_back(c);
          }
        }
        if (!closed) {
          row.error = "unterminated quoted field";
          i = data.size();
          done = true;
          break;
        }
        if (i < data.size() && data[i] != ',' && data[i] != '\n' && data[i] != '\r') {
          row.error = "text after closing quote";
          while (i < data.size() && data[i] != '\n') ++i;
        }
      } else {
        while (i < data.size() && data[i] != ',' && data[i] != '\n' && data[i] != '\r') {
          if (data[i] == '"' && !row.error) row.error = "bare quote in unquoted field";
          cell.push_back(data[i++]);
        }
      }
      row.cells.push_back(cell);
      if (i >= data.size()) {
        done = true;
      } else if (data[i] == ',') {
        ++i;
      } else {
        if (data[i] == '\r') ++i;
        if (i < data.size() && data[i] == '\n') ++i;
        ++line;
        done = true;
      }
    }
    const bool blank = row.cells.size() == 1 && row.cells[0].empty() && !row.error;
    if (!blank) rows.push_back(std::move(row));
  }
  return rows;
}

void parse_csv(std::string_view data, const ParseOptions& options, ParseOutcome& out) {
  auto rows = read_csv(data);
  if (rows.empty() || rows.front().error) throw Error(Errc::malformed_header, "CSV header row missing or malformed");
  const auto header = rows.front().cells;
  std::map<std::string, std::size_t, std::less<>> column;
  for (std::size_t c = 0; c < header.size(); ++c) {
    auto name = std::string(text::trim(header[c]));
    if (c == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name.erase(0, 3);
    if (!column.emplace(name, c).second) throw Error(Errc::malformed_header, "duplicate column " + name);
  }
  for (auto name : kRequiredColumns) {
    if (!column.contains(name)) throw Error(Errc::malformed_header, "missing column " + std::string(name));
  }

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto reject = [&](RowError e) {
      out.rejects.rejects.push_back({options.source_name, row.line, std::move(e.reason), std::move(e.field),
                                     std::move(e.detail)});
    };
    if (row.error) {
      reject({"malformed_row", "", *row.error});
      continue;
    }
    if (row.cells.size() != header.size()) {
      reject({"malformed_row", "",
              fmt::format("expected {} columns, found {}", header.size(), row.cells.size())});
      continue;
    }
    RawRow raw;
    for (auto name : kColumns) {
      if (auto it = column.find(name); it != column.end()) raw.fields.emplace(name, row.cells[it->second]);
    }
    // An empty CSV cell means "absent" for required fields.
    for (auto name : kRequiredColumns) {
      if (auto it = raw.fields.find(name); it != raw.fields.end() && it->second.empty() && name != "body") {
        raw.fields.erase(it);
      }
    }
    auto result = validate_row(raw, options);
    if (auto* e = std::get_if<RowError>(&result)) {
      reject(std::move(*e));
    } else {
      out.dataset.records.push_back(std::move(std::get<ReviewRecord>(result)));
    }
  }
}

std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void count_airlines(Dataset& ds) {
  ds.provenance.airline_counts.clear();
  for (const auto& r : ds.records) ++ds.provenance.airline_counts[r.airline];
}

Dataset derive(const Dataset& source, std::vector<ReviewRecord> records) {
  Dataset out;
  out.records = std::move(records);
  out.provenance = source.provenance;
  count_airlines(out);
  return out;
}

}  // namespace

Dataset make_dataset(std::vector<ReviewRecord> records, std::vector<std::string> sources) {
  Dataset ds;
  ds.records = std::move(records);
  ds.provenance.sources = std::move(sources);
  ds.provenance.loaded_at = now_utc();
  count_airlines(ds);
  return ds;
}

Format parse_format(std::string_view tag) {
  const auto t = text::ascii_lower(tag);
  if (t == "jsonl") return Format::jsonl;
  if (t == "csv") return Format::csv;
  throw Error(Errc::unknown_format, std::string(tag));
}

std::string_view to_string(Format f) noexcept { return f == Format::jsonl ? "jsonl" : "csv"; }

ParseOutcome parse_dataset(std::string_view data, Format format, const ParseOptions& options) {
  if (!text::is_valid_utf8(data)) throw Error(Errc::undecodable_stream, options.source_name + " is not valid UTF-8");
  ParseOutcome out;
  if (format == Format::jsonl) {
    parse_jsonl(data, options, out);
  } else {
    parse_csv(data, options, out);
  }
  out.dataset.provenance.sources = {options.source_name};
  out.dataset.provenance.loaded_at = now_utc();
  count_airlines(out.dataset);
  return out;
}

ParseOutcome parse_files(std::vector<std::filesystem::path> paths, Format format, const ParseOptions& options) {
  std::sort(paths.begin(), paths.end());
  std::vector<std::string> contents;
  contents.reserve(paths.size());
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(Errc::io, "cannot read " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    contents.push_back(buf.str());
  }

  std::vector<std::future<ParseOutcome>> jobs;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    ParseOptions per_file = options;
    per_file.source_name = paths[i].string();
    jobs.push_back(std::async(std::launch::async, [&contents, i, format, per_file] {
      return parse_dataset(contents[i], format, per_file);
    }));
  }

  ParseOutcome merged;
  for (auto& job : jobs) {
    auto part = job.get();
    for (auto& r : part.dataset.records) merged.dataset.records.push_back(std::move(r));
    for (auto& r : part.rejects.rejects) merged.rejects.rejects.push_back(std::move(r));
  }
  for (const auto& p : paths) merged.dataset.provenance.sources.push_back(p.string());
  merged.dataset.provenance.loaded_at = now_utc();
  count_airlines(merged.dataset);
  return merged;
}

std::string serialize_dataset(const Dataset& ds, Format format) {
  std::string out;
  if (format == Format::jsonl) {
    for (const auto& r : ds.records) {
      ordered_json obj;
      obj["review_id"] = r.review_id;
      obj["airline"] = r.airline;
      obj["rating"] = r.rating;
      obj["title"] = r.title;
      obj["body"] = r.body;
      obj["language"] = r.language;
      obj["review_date"] = r.review_date.to_string();
      obj["reviewer_origin"] = r.reviewer_origin;
      obj["route_from"] = r.route_from.empty() ? ordered_json(nullptr) : ordered_json(r.route_from);
      obj["route_to"] = r.route_to.empty() ? ordered_json(nullptr) : ordered_json(r.route_to);
      out += obj.dump();
      out += '\n';
    }
    return out;
  }
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    if (c) out += ',';
    out += kColumns[c];
  }
  out += '\n';
  for (const auto& r : ds.records) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", csv_escape(r.review_id), csv_escape(r.airline), r.rating,
                       csv_escape(r.title), csv_escape(r.body), csv_escape(r.language), r.review_date.to_string(),
                       csv_escape(r.reviewer_origin), r.route_from, r.route_to);
  }
  return out;
}

std::string reject_report_jsonl(const RejectReport& report) {
  std::string out;
  for (const auto& r : report.rejects) {
    ordered_json obj;
    obj["source"] = r.source;
    obj["line"] = r.line;
    obj["reason"] = r.reason;
    obj["field"] = r.field;
    obj["detail"] = r.detail;
    out += obj.dump(-1, ' ', false, json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

std::string content_review_id(std::string_view airline, const Date& date, std::string_view body) {
  std::string key;
  key.append(airline).push_back('\x1f');
  key.append(date.to_string()).push_back('\x1f');
  key.append(body);
  return "h:" + sha256_hex(key).substr(0, 20);
}

std::pair<Dataset, std::size_t> deduplicate(const Dataset& ds) {
  std::unordered_set<std::string> seen;
  std::vector<ReviewRecord> kept;
  kept.reserve(ds.records.size());
  for (const auto& r : ds.records) {
    if (seen.insert(r.review_id).second) kept.push_back(r);
  }
  const auto dropped = ds.records.size() - kept.size();
  return {derive(ds, std::move(kept)), dropped};
}

Dataset diagnostic_filter(const Dataset& ds, int max_rating) {
  if (max_rating < 1 || max_rating > 5) {
    throw Error(Errc::invalid_rating_band, "max_rating must be within 1..5, got " + std::to_string(max_rating));
  }
  std::vector<ReviewRecord> kept;
  std::copy_if(ds.records.begin(), ds.records.end(), std::back_inserter(kept),
               [&](const ReviewRecord& r) { return r.rating <= max_rating; });
  return derive(ds, std::move(kept));
}

Dataset window_filter(const Dataset& ds, const Date& from, const Date& to) {
  if (to < from) throw Error(Errc::inverted_range, from.to_string() + " > " + to.to_string());
  const DateRange range{from, to};
  std::vector<ReviewRecord> kept;
  std::copy_if(ds.records.begin(), ds.records.end(), std::back_inserter(kept),
               [&](const ReviewRecord& r) { return range.contains(r.review_date); });
  return derive(ds, std::move(kept));
}

DatasetStats dataset_stats(const Dataset& ds) {
  DatasetStats s;
  s.total = ds.records.size();
  for (const auto& r : ds.records) {
    ++s.per_airline[r.airline];
    ++s.per_language[r.language];
    ++s.per_year[r.review_date.year];
    ++s.rating_histogram[static_cast<std::size_t>(r.rating - 1)];
  }
  return s;
}

}  // namespace airlens
