#include "airlens/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <fmt/format.h>

#include "airlens/error.hpp"
#include "airlens/hash.hpp"

namespace airlens {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kManifestHeader = "airlens-store v1";
constexpr std::string_view kManifestName = "MANIFEST";
constexpr std::string_view kLockName = "LOCK";

struct SegmentEntry {
  std::string file;
  std::size_t records = 0;
  std::size_t bytes = 0;
  std::string sha256;
};

struct Manifest {
  std::vector<SegmentEntry> segments;

  std::string render() const {
    std::string out(kManifestHeader);
    out += '\n';
    for (const auto& s : segments) {
      out += fmt::format("segment {} records={} bytes={} sha256={}\n", s.file, s.records, s.bytes, s.sha256);
    }
    return out;
  }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool is_segment_name(std::string_view name) {
  if (name.size() != 16 || name.substr(0, 4) != "seg-" || name.substr(12) != ".log") return false;
  return std::all_of(name.begin() + 4, name.begin() + 12, [](char c) { return c >= '0' && c <= '9'; });
}

std::optional<Manifest> parse_manifest(const std::string& content, std::string& problem) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line) || line != kManifestHeader) {
    problem = "bad manifest header";
    return std::nullopt;
  }
  Manifest m;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string kind;
    SegmentEntry e;
    fields >> kind >> e.file;
    std::string kv;
    bool have_records = false, have_bytes = false, have_hash = false;
    while (fields >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const auto key = kv.substr(0, eq);
      const auto value = kv.substr(eq + 1);
      try {
        if (key == "records") {
          e.records = std::stoull(value);
          have_records = true;
        } else if (key == "bytes") {
          e.bytes = std::stoull(value);
          have_bytes = true;
        } else if (key == "sha256") {
          e.sha256 = value;
          have_hash = value.size() == 64;
        }
      } catch (const std::exception&) {
        break;
      }
    }
    if (kind != "segment" || !is_segment_name(e.file) || !have_records || !have_bytes || !have_hash) {
      problem = fmt::format("manifest line {} malformed", line_no);
      return std::nullopt;
    }
    m.segments.push_back(std::move(e));
  }
  return m;
}

void write_fully(int fd, std::string_view data, const fs::path& p) {
  while (!data.empty()) {
    const auto n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::io, fmt::format("write {}: {}", p.string(), std::strerror(errno)));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

void write_file(const fs::path& p, std::string_view data, bool sync) {
  const int fd = ::open(p.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(Errc::io, fmt::format("open {}: {}", p.string(), std::strerror(errno)));
  try {
    write_fully(fd, data, p);
    if (sync && ::fsync(fd) != 0) throw Error(Errc::io, "fsync " + p.string());
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
}

void sync_dir(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

struct ReviewOrder {
  bool operator()(const ReviewRecord* a, const ReviewRecord* b) const {
    return std::tie(a->review_date, a->review_id) < std::tie(b->review_date, b->review_id);
  }
};

}  // namespace

struct Store::Impl {
  fs::path root;
  StoreMode mode = StoreMode::read_only;
  StoreOptions options;
  int lock_fd = -1;

  mutable std::mutex mu;
  Manifest manifest;
  std::string manifest_text;
  std::map<std::string, ReviewRecord> reviews;
  std::map<std::pair<std::string, std::string>, ExtractionResult> extractions;  // (review_id, extractor_id)

  ~Impl() {
    if (lock_fd >= 0) {
      ::flock(lock_fd, LOCK_UN);
      ::close(lock_fd);
    }
  }

  void require_writable() const {
    if (mode != StoreMode::read_write) throw Error(Errc::read_only, "store opened read-only: " + root.string());
  }

  bool apply_review(const ReviewRecord& r) {
    auto [it, inserted] = reviews.try_emplace(r.review_id, r);
    if (inserted) return true;
    if (it->second == r) return false;
    it->second = r;
    return true;
  }

  bool apply_extraction(const ExtractionResult& r) {
    auto key = std::make_pair(r.review_id, r.extractor_id);
    auto [it, inserted] = extractions.try_emplace(key, r);
    if (inserted) return true;
    if (it->second == r) return false;
    if (it->second.status == ExtractionStatus::ok && r.status == ExtractionStatus::failed) return false;
    it->second = r;
    return true;
  }

  void replay_line(std::string_view line, const std::string& segment) {
    if (line.size() < 2 || line[1] != '\t') throw Error(Errc::corrupt_store, "bad record in " + segment);
    const auto payload = line.substr(2);
    if (line[0] == 'R') {
      apply_review(decode_review(payload));
    } else if (line[0] == 'E') {
      apply_extraction(decode_result(payload));
    } else {
      throw Error(Errc::corrupt_store, "unknown record tag in " + segment);
    }
  }

  std::string next_segment_name() const {
    unsigned long next = 1;
    for (const auto& s : manifest.segments) next = std::max(next, std::stoul(s.file.substr(4, 8)) + 1);
    return fmt::format("seg-{:08d}.log", next);
  }

  // Append-then-commit: segment is durable before the manifest names it.
  void commit_segment(const std::string& body, std::size_t records) {
    const auto name = next_segment_name();
    write_file(root / name, body, options.sync);
    Manifest next = manifest;
    next.segments.push_back({name, records, body.size(), sha256_hex(body)});
    install_manifest(next);
  }

  void maybe_compact() {
    if (manifest.segments.size() > options.compact_threshold) compact();
  }

  void install_manifest(const Manifest& next) {
    const auto text = next.render();
    const auto tmp = root / "MANIFEST.tmp";
    write_file(tmp, text, options.sync);
    fs::rename(tmp, root / kManifestName);
    if (options.sync) sync_dir(root);
    manifest = next;
    manifest_text = text;
  }

  std::string render_state(std::size_t& records) const {
    std::string body;
    records = 0;
    for (const auto& [id, r] : reviews) {
      body += "R\t" + encode_review(r) + "\n";
      ++records;
    }
    for (const auto& [key, r] : extractions) {
      body += "E\t" + encode_result(r) + "\n";
      ++records;
    }
    return body;
  }

  void compact() {
    std::size_t records = 0;
    const auto body = render_state(records);
    const auto name = next_segment_name();
    write_file(root / name, body, options.sync);
    const auto old = manifest.segments;
    install_manifest(Manifest{{{name, records, body.size(), sha256_hex(body)}}});
    for (const auto& s : old) {
      std::error_code ec;
      fs::remove(root / s.file, ec);
    }
  }

  void load() {
    const auto manifest_path = root / kManifestName;
    if (!fs::exists(manifest_path)) {
      manifest = {};
      manifest_text = std::string(kManifestHeader) + "\n";
      return;
    }
    manifest_text = read_file(manifest_path);
    std::string problem;
    auto parsed = parse_manifest(manifest_text, problem);
    if (!parsed) throw Error(Errc::corrupt_store, problem);
    manifest = *parsed;
    for (const auto& s : manifest.segments) {
      const auto p = root / s.file;
      std::error_code ec;
      const auto size = fs::file_size(p, ec);
      if (ec) throw Error(Errc::corrupt_store, "missing segment " + s.file);
      if (size != s.bytes) {
        throw Error(Errc::corrupt_store, fmt::format("segment {} has {} bytes, manifest says {}", s.file, size, s.bytes));
      }
      const auto content = read_file(p);
      std::size_t pos = 0;
      while (pos < content.size()) {
        auto nl = content.find('\n', pos);
        if (nl == std::string::npos) throw Error(Errc::corrupt_store, "truncated record in " + s.file);
        replay_line(std::string_view(content).substr(pos, nl - pos), s.file);
        pos = nl + 1;
      }
    }
  }

  std::vector<std::string> orphan_files() const {
    std::vector<std::string> out;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) return out;
    std::set<std::string> live;
    for (const auto& s : manifest.segments) live.insert(s.file);
    for (const auto& entry : fs::directory_iterator(root)) {
      const auto name = entry.path().filename().string();
      if ((is_segment_name(name) && !live.contains(name)) || name == "MANIFEST.tmp") out.push_back(name);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

Store::Store(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Store::Store(Store&&) noexcept = default;
Store& Store::operator=(Store&&) noexcept = default;
Store::~Store() = default;

Store Store::open(const fs::path& root, StoreMode mode, StoreOptions options) {
  auto impl = std::make_unique<Impl>();
  impl->root = root;
  impl->mode = mode;
  impl->options = options;
  if (mode == StoreMode::read_write) {
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw Error(Errc::io, "cannot create store " + root.string() + ": " + ec.message());
    const auto lock_path = root / kLockName;
    impl->lock_fd = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (impl->lock_fd < 0) throw Error(Errc::io, "cannot open " + lock_path.string());
    if (::flock(impl->lock_fd, LOCK_EX | LOCK_NB) != 0) {
      throw Error(Errc::lock_held, "another writer holds " + lock_path.string());
    }
  }
  impl->load();
  if (mode == StoreMode::read_write) {
    // Leftovers from an interrupted commit were never referenced.
    for (const auto& name : impl->orphan_files()) {
      std::error_code ec;
      fs::remove(root / name, ec);
    }
  }
  return Store(std::move(impl));
}

const fs::path& Store::root() const noexcept { return impl_->root; }
StoreMode Store::mode() const noexcept { return impl_->mode; }

std::size_t Store::put_reviews(const Dataset& ds) {
  std::lock_guard lock(impl_->mu);
  impl_->require_writable();
  std::map<std::string, const ReviewRecord*> changed;
  for (const auto& r : ds.records) {
    auto it = impl_->reviews.find(r.review_id);
    if (it != impl_->reviews.end() && it->second == r) {
      changed.erase(r.review_id);
      continue;
    }
    changed[r.review_id] = &r;
  }
  if (changed.empty()) return 0;
  std::string body;
  for (const auto& [id, r] : changed) body += "R\t" + encode_review(*r) + "\n";
  impl_->commit_segment(body, changed.size());
  for (const auto& [id, r] : changed) impl_->apply_review(*r);
  impl_->maybe_compact();
  return changed.size();
}

void Store::put_extraction(const ExtractionResult& result) { put_extractions(std::span(&result, 1)); }

std::size_t Store::put_extractions(std::span<const ExtractionResult> results) {
  std::lock_guard lock(impl_->mu);
  impl_->require_writable();
  for (const auto& r : results) {
    if (!impl_->reviews.contains(r.review_id)) throw Error(Errc::dangling_reference, r.review_id);
  }
  // Decide against the committed state plus earlier entries of this batch.
  std::map<std::pair<std::string, std::string>, const ExtractionResult*> overlay;
  std::vector<const ExtractionResult*> accepted;
  for (const auto& r : results) {
    auto key = std::make_pair(r.review_id, r.extractor_id);
    const ExtractionResult* current = nullptr;
    if (auto o = overlay.find(key); o != overlay.end()) {
      current = o->second;
    } else if (auto it = impl_->extractions.find(key); it != impl_->extractions.end()) {
      current = &it->second;
    }
    if (current != nullptr) {
      if (*current == r) continue;
      if (current->status == ExtractionStatus::ok && r.status == ExtractionStatus::failed) continue;
    }
    overlay[key] = &r;
    accepted.push_back(&r);
  }
  if (accepted.empty()) return 0;
  std::string body;
  for (const auto* r : accepted) body += "E\t" + encode_result(*r) + "\n";
  impl_->commit_segment(body, accepted.size());
  for (const auto* r : accepted) impl_->apply_extraction(*r);
  impl_->maybe_compact();
  return accepted.size();
}

std::vector<ExtractedReview> Store::query_extractions(const Query& q) const {
  std::lock_guard lock(impl_->mu);
  std::vector<ExtractedReview> out;
  for (const auto& [key, result] : impl_->extractions) {
    const auto& review = impl_->reviews.at(key.first);
    if (q.airline && review.airline != *q.airline) continue;
    if (q.dates && !q.dates->contains(review.review_date)) continue;
    if (q.status && result.status != *q.status) continue;
    if (q.extractor_id && result.extractor_id != *q.extractor_id) continue;
    if (q.label && std::none_of(result.issues.begin(), result.issues.end(),
                                [&](const ExtractedIssue& i) { return i.label == *q.label; })) {
      continue;
    }
    if (q.category && std::none_of(result.issues.begin(), result.issues.end(),
                                   [&](const ExtractedIssue& i) { return i.category == *q.category; })) {
      continue;
    }
    out.push_back({review, result});
  }
  std::sort(out.begin(), out.end(), [](const ExtractedReview& a, const ExtractedReview& b) {
    return std::tie(a.review.review_date, a.review.review_id, a.result.extractor_id) <
           std::tie(b.review.review_date, b.review.review_id, b.result.extractor_id);
  });
  return out;
}

std::set<std::string> Store::checkpoint_state(const std::optional<std::string>& extractor_id) const {
  std::lock_guard lock(impl_->mu);
  std::set<std::string> out;
  for (const auto& [key, result] : impl_->extractions) {
    if (result.status != ExtractionStatus::ok) continue;
    if (extractor_id && key.second != *extractor_id) continue;
    out.insert(key.first);
  }
  return out;
}

Dataset Store::reviews() const {
  std::lock_guard lock(impl_->mu);
  std::vector<const ReviewRecord*> order;
  order.reserve(impl_->reviews.size());
  for (const auto& [id, r] : impl_->reviews) order.push_back(&r);
  std::sort(order.begin(), order.end(), ReviewOrder{});
  std::vector<ReviewRecord> records;
  records.reserve(order.size());
  for (const auto* r : order) records.push_back(*r);
  return make_dataset(std::move(records), {impl_->root.string()});
}

std::optional<ReviewRecord> Store::review(const std::string& review_id) const {
  std::lock_guard lock(impl_->mu);
  auto it = impl_->reviews.find(review_id);
  if (it == impl_->reviews.end()) return std::nullopt;
  return it->second;
}

std::size_t Store::review_count() const {
  std::lock_guard lock(impl_->mu);
  return impl_->reviews.size();
}

std::size_t Store::extraction_count() const {
  std::lock_guard lock(impl_->mu);
  return impl_->extractions.size();
}

std::string Store::state_digest() const {
  std::lock_guard lock(impl_->mu);
  return sha256_hex(impl_->manifest_text);
}

VerifyReport Store::verify() const {
  std::lock_guard lock(impl_->mu);
  VerifyReport report;
  report.segments = impl_->manifest.segments.size();
  for (const auto& s : impl_->manifest.segments) {
    const auto p = impl_->root / s.file;
    std::string content;
    try {
      content = read_file(p);
    } catch (const Error&) {
      report.problems.push_back("missing segment " + s.file);
      continue;
    }
    if (content.size() != s.bytes) {
      report.problems.push_back(fmt::format("{}: size {} != manifest {}", s.file, content.size(), s.bytes));
    }
    if (sha256_hex(content) != s.sha256) report.problems.push_back(s.file + ": sha256 mismatch");
    const auto lines = static_cast<std::size_t>(std::count(content.begin(), content.end(), '\n'));
    if (lines != s.records) {
      report.problems.push_back(fmt::format("{}: {} records != manifest {}", s.file, lines, s.records));
    }
    report.records += lines;
  }
  report.reviews = impl_->reviews.size();
  report.extractions = impl_->extractions.size();
  report.orphans = impl_->orphan_files();
  report.ok = report.problems.empty();
  return report;
}

VerifyReport verify_store(const fs::path& root) {
  try {
    return Store::open(root, StoreMode::read_only).verify();
  } catch (const Error& e) {
    VerifyReport report;
    report.ok = false;
    report.problems.push_back(e.what());
    return report;
  }
}

}  // namespace airlens
