#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace airlens {

struct MacroCategory {
  std::string id;
  std::string display_name;

  bool operator==(const MacroCategory&) const = default;
};

struct IssueLabel {
  std::string id;
  std::string display_name;
  std::string category;  // MacroCategory id
  std::vector<std::string> aliases;

  bool operator==(const IssueLabel&) const = default;
};

// A raw label string that matched nothing; carries the normalized form.
struct Unmatched {
  std::string normalized;

  bool operator==(const Unmatched&) const = default;
};

using LabelResolution = std::variant<IssueLabel, Unmatched>;

inline constexpr std::string_view kAllCategories = "all";

// Fixed two-level issue hierarchy: specific issue labels, each belonging to
// exactly one macro-category. Immutable after loading.
class Taxonomy {
 public:
  const std::string& version() const noexcept { return version_; }

  // Both sorted by id.
  std::span<const MacroCategory> categories() const noexcept { return categories_; }
  std::span<const IssueLabel> labels() const noexcept { return labels_; }

  bool has_label(std::string_view id) const noexcept;
  bool has_category(std::string_view id) const noexcept;

  // Throws Errc::unknown_label / Errc::unknown_category.
  const IssueLabel& label(std::string_view id) const;
  const MacroCategory& category(std::string_view id) const;

  // Exact lookup of the normalized form against ids, display names and
  // aliases. No fuzzy matching. Throws Errc::empty_label when nothing is
  // left after normalization.
  LabelResolution resolve_label(std::string_view raw) const;

  const MacroCategory& category_of(std::string_view label_id) const;

  // Labels in one category (or kAllCategories), ordered by id.
  std::vector<IssueLabel> list_labels(std::string_view category_id) const;

  // Canonical document form; load_taxonomy(to_document()) == *this.
  std::string to_document() const;

  bool operator==(const Taxonomy& other) const {
    return version_ == other.version_ && categories_ == other.categories_ && labels_ == other.labels_;
  }

 private:
  friend Taxonomy load_taxonomy(std::string_view document);

  std::string version_;
  std::vector<MacroCategory> categories_;
  std::vector<IssueLabel> labels_;
  std::map<std::string, std::size_t, std::less<>> lookup_;  // normalized key -> labels_ index
};

// Parses and validates a taxonomy document (see docs/formats.md).
Taxonomy load_taxonomy(std::string_view document);
Taxonomy load_taxonomy_file(const std::filesystem::path& path);

// The 35-label default taxonomy compiled into the binary.
const Taxonomy& default_taxonomy();

}  // namespace airlens
