#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "airlens/error.hpp"

namespace airlens {

struct Region {
  std::string id;
  std::string display_name;

  bool operator==(const Region&) const = default;
};

// Ordered origin-string rules; the first rule whose pattern appears as a whole
// token sequence in the normalized origin wins, otherwise the fallback region.
class RegionMap {
 public:
  struct Rule {
    std::string pattern;  // as written in the document
    std::string region;
    std::vector<std::string> tokens;
  };

  const std::string& version() const noexcept { return version_; }
  const std::string& fallback() const noexcept { return fallback_; }
  const std::vector<Region>& regions() const noexcept { return regions_; }
  const std::vector<Rule>& rules() const noexcept { return rules_; }

  const Region& region(std::string_view id) const;  // Errc::unknown_region
  std::string assign(std::string_view origin) const;

 private:
  friend RegionMap load_region_map(std::string_view document);

  std::string version_;
  std::string fallback_;
  std::vector<Region> regions_;
  std::vector<Rule> rules_;
};

// Location strings are split on anything that is not a letter or digit, after
// case folding, so "Riyadh, Saudi Arabia" yields {riyadh, saudi, arabia}.
std::vector<std::string> origin_tokens(std::string_view origin);

RegionMap load_region_map(std::string_view document);
RegionMap load_region_map_file(const std::string& path);
const RegionMap& default_region_map();

}  // namespace airlens
