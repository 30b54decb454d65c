#include "airlens/region_map.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "airlens/error.hpp"
#include "airlens/resources.hpp"
#include "airlens/text.hpp"

namespace airlens {

using nlohmann::json;

std::vector<std::string> origin_tokens(std::string_view origin) {
  const auto folded = text::fold_for_matching(text::nfc(origin)).folded;
  std::vector<std::string> tokens;
  std::string current;
  std::size_t pos = 0;
  while (pos < folded.size()) {
    const auto cp = text::code_point_at(folded, pos);
    std::size_t next = pos + 1;
    while (next < folded.size() && (static_cast<unsigned char>(folded[next]) & 0xC0) == 0x80) ++next;
    if (text::is_word_char(cp)) {
      current.append(folded, pos, next - pos);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
    pos = next;
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

const Region& RegionMap::region(std::string_view id) const {
  auto it = std::find_if(regions_.begin(), regions_.end(), [&](const Region& r) { return r.id == id; });
  if (it == regions_.end()) throw Error(Errc::unknown_region, std::string(id));
  return *it;
}

std::string RegionMap::assign(std::string_view origin) const {
  const auto tokens = origin_tokens(origin);
  if (tokens.empty()) return fallback_;
  for (const auto& rule : rules_) {
    const auto& pat = rule.tokens;
    if (pat.size() > tokens.size()) continue;
    for (std::size_t i = 0; i + pat.size() <= tokens.size(); ++i) {
      if (std::equal(pat.begin(), pat.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) return rule.region;
    }
  }
  return fallback_;
}

RegionMap load_region_map(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(Errc::malformed_document, e.what());
  }
  auto need = [&](const char* key, auto check) {
    if (!doc.is_object() || !doc.contains(key) || !check(doc[key])) {
      throw Error(Errc::malformed_document, std::string("region map field '") + key + "' missing or invalid");
    }
  };
  need("version", [](const json& j) { return j.is_string(); });
  need("fallback", [](const json& j) { return j.is_string(); });
  need("regions", [](const json& j) { return j.is_array(); });
  need("rules", [](const json& j) { return j.is_array(); });

  RegionMap map;
  map.version_ = doc["version"].get<std::string>();
  map.fallback_ = doc["fallback"].get<std::string>();
  std::set<std::string> ids;
  for (const auto& r : doc["regions"]) {
    if (!r.is_object() || !r.contains("id") || !r.contains("display_name") || !r["id"].is_string() ||
        !r["display_name"].is_string()) {
      throw Error(Errc::malformed_document, "region entries need id and display_name");
    }
    Region region{r["id"].get<std::string>(), r["display_name"].get<std::string>()};
    if (!ids.insert(region.id).second) throw Error(Errc::malformed_document, "duplicate region " + region.id);
    map.regions_.push_back(std::move(region));
  }
  if (!ids.contains(map.fallback_)) throw Error(Errc::unknown_region, "fallback " + map.fallback_);
  for (const auto& r : doc["rules"]) {
    if (!r.is_object() || !r.contains("pattern") || !r.contains("region") || !r["pattern"].is_string() ||
        !r["region"].is_string()) {
      throw Error(Errc::malformed_document, "rule entries need pattern and region");
    }
    RegionMap::Rule rule{r["pattern"].get<std::string>(), r["region"].get<std::string>(), {}};
    if (!ids.contains(rule.region)) throw Error(Errc::unknown_region, rule.region);
    rule.tokens = origin_tokens(rule.pattern);
    if (rule.tokens.empty()) throw Error(Errc::malformed_document, "blank pattern");
    map.rules_.push_back(std::move(rule));
  }
  return map;
}

RegionMap load_region_map_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read region map " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_region_map(buf.str());
}

const RegionMap& default_region_map() {
  static const RegionMap map = load_region_map(resources::region_map_document());
  return map;
}

}  // namespace airlens
