#include "airlens/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "airlens/error.hpp"
#include "airlens/resources.hpp"
#include "airlens/text.hpp"

namespace airlens {

using nlohmann::json;

namespace {

bool is_canonical_token(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

std::string required_string(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(Errc::malformed_document, std::string(where) + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

template <typename T>
auto find_by_id(const std::vector<T>& items, std::string_view id) {
  return std::lower_bound(items.begin(), items.end(), id,
                          [](const T& item, std::string_view key) { return item.id < key; });
}

}  // namespace

Taxonomy load_taxonomy(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(Errc::malformed_document, e.what());
  }
  if (!doc.is_object()) throw Error(Errc::malformed_document, "taxonomy document must be an object");

  Taxonomy t;
  t.version_ = required_string(doc, "version", "taxonomy");
  if (text::trim(t.version_).empty()) throw Error(Errc::malformed_document, "version must be non-empty");

  const auto cats = doc.find("categories");
  if (cats == doc.end() || !cats->is_array()) throw Error(Errc::malformed_document, "missing 'categories' array");
  for (const auto& c : *cats) {
    if (!c.is_object()) throw Error(Errc::malformed_document, "category entries must be objects");
    MacroCategory cat{required_string(c, "id", "category"), required_string(c, "display_name", "category")};
    if (!is_canonical_token(cat.id)) throw Error(Errc::malformed_document, "category id not canonical: " + cat.id);
    if (t.has_category(cat.id)) throw Error(Errc::malformed_document, "duplicate category id: " + cat.id);
    t.categories_.insert(find_by_id(t.categories_, cat.id), std::move(cat));
  }
  if (auto declared = doc.find("category_count"); declared != doc.end()) {
    if (!declared->is_number_unsigned() || declared->get<std::size_t>() != t.categories_.size()) {
      throw Error(Errc::category_count_mismatch, "declared " + declared->dump() + ", found " +
                                                     std::to_string(t.categories_.size()));
    }
  }

  const auto labels = doc.find("labels");
  if (labels == doc.end() || !labels->is_array()) throw Error(Errc::malformed_document, "missing 'labels' array");
  if (labels->empty()) throw Error(Errc::empty_taxonomy, "taxonomy declares no labels");

  std::vector<IssueLabel> parsed;
  std::map<std::string, std::string, std::less<>> owner;  // normalized key -> label id
  for (const auto& l : *labels) {
    if (!l.is_object()) throw Error(Errc::malformed_document, "label entries must be objects");
    IssueLabel label;
    label.id = required_string(l, "id", "label");
    label.display_name = required_string(l, "display_name", "label " + label.id);
    label.category = required_string(l, "category", "label " + label.id);
    if (auto a = l.find("aliases"); a != l.end()) {
      if (!a->is_array()) throw Error(Errc::malformed_document, "aliases must be an array: " + label.id);
      for (const auto& alias : *a) {
        if (!alias.is_string()) throw Error(Errc::malformed_document, "alias must be a string: " + label.id);
        label.aliases.push_back(alias.get<std::string>());
      }
    }
    if (!is_canonical_token(label.id)) throw Error(Errc::malformed_document, "label id not canonical: " + label.id);
    if (!t.has_category(label.category)) {
      throw Error(Errc::unknown_category_reference, label.id + " -> " + label.category);
    }

    // Names first, so a label pasted under a second category reports the
    // collision rather than the repeated id.
    std::vector<std::string> names{text::normalize_label(label.display_name)};
    for (const auto& alias : label.aliases) names.push_back(text::normalize_label(alias));
    for (const auto& key : names) {
      if (key.empty()) throw Error(Errc::malformed_document, "blank name or alias on " + label.id);
      if (auto it = owner.find(key); it != owner.end() && it->second != label.id) {
        throw Error(Errc::alias_collision, "'" + key + "' used by " + it->second + " and " + label.id);
      }
    }
    if (std::any_of(parsed.begin(), parsed.end(), [&](const IssueLabel& p) { return p.id == label.id; })) {
      throw Error(Errc::duplicate_label, label.id);
    }
    if (auto it = owner.find(label.id); it != owner.end()) {
      throw Error(Errc::alias_collision, "id '" + label.id + "' is a name of " + it->second);
    }
    for (auto& key : names) owner.emplace(std::move(key), label.id);
    owner.emplace(label.id, label.id);
    parsed.push_back(std::move(label));
  }

  std::sort(parsed.begin(), parsed.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  t.labels_ = std::move(parsed);
  for (std::size_t i = 0; i < t.labels_.size(); ++i) {
    for (const auto& [key, id] : owner) {
      if (id == t.labels_[i].id) t.lookup_.emplace(key, i);
    }
  }
  return t;
}

Taxonomy load_taxonomy_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read taxonomy " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_taxonomy(buf.str());
}

const Taxonomy& default_taxonomy() {
  static const Taxonomy t = load_taxonomy(resources::taxonomy_document());
  return t;
}

bool Taxonomy::has_label(std::string_view id) const noexcept {
  auto it = find_by_id(labels_, id);
  return it != labels_.end() && it->id == id;
}

bool Taxonomy::has_category(std::string_view id) const noexcept {
  auto it = find_by_id(categories_, id);
  return it != categories_.end() && it->id == id;
}

const IssueLabel& Taxonomy::label(std::string_view id) const {
  auto it = find_by_id(labels_, id);
  if (it == labels_.end() || it->id != id) throw Error(Errc::unknown_label, std::string(id));
  return *it;
}

const MacroCategory& Taxonomy::category(std::string_view id) const {
  auto it = find_by_id(categories_, id);
  if (it == categories_.end() || it->id != id) throw Error(Errc::unknown_category, std::string(id));
  return *it;
}

LabelResolution Taxonomy::resolve_label(std::string_view raw) const {
  auto key = text::normalize_label(raw);
  if (key.empty()) throw Error(Errc::empty_label, "label is blank after normalization");
  if (auto it = lookup_.find(key); it != lookup_.end()) return labels_[it->second];
  return Unmatched{std::move(key)};
}

const MacroCategory& Taxonomy::category_of(std::string_view label_id) const {
  return category(label(label_id).category);
}

std::vector<IssueLabel> Taxonomy::list_labels(std::string_view category_id) const {
  if (category_id == kAllCategories) return labels_;
  category(category_id);
  std::vector<IssueLabel> out;
  std::copy_if(labels_.begin(), labels_.end(), std::back_inserter(out),
               [&](const IssueLabel& l) { return l.category == category_id; });
  return out;
}

std::string Taxonomy::to_document() const {
  json doc;
  doc["version"] = version_;
  doc["category_count"] = categories_.size();
  doc["categories"] = json::array();
  for (const auto& c : categories_) doc["categories"].push_back({{"id", c.id}, {"display_name", c.display_name}});
  doc["labels"] = json::array();
  for (const auto& l : labels_) {
    doc["labels"].push_back(
        {{"id", l.id}, {"display_name", l.display_name}, {"category", l.category}, {"aliases", l.aliases}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace airlens
