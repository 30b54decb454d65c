#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "airlens/error.hpp"
#include "airlens/extraction_result.hpp"
#include "airlens/taxonomy.hpp"

namespace airlens {

struct LexiconEntry {
  std::string language;  // lowercase primary tag, or "*" for every language
  std::string phrase;
  std::string label;
  std::string category;

  bool operator==(const LexiconEntry&) const = default;
};

// Keyword phrases per language mapped to issue labels. Matching is
// case-insensitive, whitespace-collapsed and word-boundary aware.
class Lexicon {
 public:
  const std::string& version() const noexcept { return version_; }
  std::string extractor_id() const { return "lexicon:" + version_; }
  std::span<const LexiconEntry> entries() const noexcept { return entries_; }

  struct Match {
    std::size_t entry = 0;  // index into entries()
    std::size_t begin = 0;  // byte range in the NFC body
    std::size_t end = 0;
  };

  // Longest match at each position, scanning left to right; matches never
  // overlap. Offsets refer to text::nfc(body).
  std::vector<Match> scan(std::string_view nfc_body, std::string_view language) const;

 private:
  friend Lexicon load_lexicon(std::string_view document, const Taxonomy& taxonomy);

  struct Node {
    std::map<unsigned char, std::size_t> next;
    long entry = -1;
  };
  struct Trie {
    std::vector<Node> nodes{Node{}};
  };

  void insert(std::size_t entry_index, const std::string& folded_phrase);

  std::string version_;
  std::vector<LexiconEntry> entries_;
  std::map<std::string, Trie, std::less<>> tries_;  // per language
};

// Errc::unknown_label for targets outside the taxonomy, Errc::duplicate_phrase
// when two entries fold to the same phrase in one language.
Lexicon load_lexicon(std::string_view document, const Taxonomy& taxonomy);

// Bundled English/Arabic/French/German keyword list.
Lexicon default_lexicon(const Taxonomy& taxonomy);

// Deterministic offline extractor: one issue per matched label, in order of
// first occurrence, snippet copied from the body.
ExtractionResult lexicon_extract(const ReviewRecord& review, const Lexicon& lexicon);

}  // namespace airlens
