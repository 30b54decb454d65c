#pragma once

#include <string_view>

// Documents bundled into the binary at build time from data/.
namespace airlens::resources {

std::string_view taxonomy_document() noexcept;
std::string_view region_map_document() noexcept;
std::string_view lexicon_document() noexcept;

}  // namespace airlens::resources
