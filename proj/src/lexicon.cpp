#include "airlens/lexicon.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "airlens/error.hpp"
#include "airlens/resources.hpp"
#include "airlens/text.hpp"

namespace airlens {

using nlohmann::json;

namespace {

std::string fold_phrase(std::string_view phrase) {
  auto folded = text::fold_for_matching(text::nfc(phrase)).folded;
  return std::string(text::trim(folded));
}

std::string primary_subtag(std::string_view language) {
  return text::ascii_lower(language.substr(0, language.find('-')));
}

}  // namespace

void Lexicon::insert(std::size_t entry_index, const std::string& folded_phrase) {
  auto& trie = tries_[entries_[entry_index].language];
  std::size_t node = 0;
  for (unsigned char c : folded_phrase) {
    auto it = trie.nodes[node].next.find(c);
    if (it == trie.nodes[node].next.end()) {
      trie.nodes.push_back(Node{});
      it = trie.nodes[node].next.emplace(c, trie.nodes.size() - 1).first;
    }
    node = it->second;
  }
  if (trie.nodes[node].entry >= 0) {
    throw Error(Errc::duplicate_phrase, entries_[entry_index].language + ": " + entries_[entry_index].phrase);
  }
  trie.nodes[node].entry = static_cast<long>(entry_index);
}

Lexicon load_lexicon(std::string_view document, const Taxonomy& taxonomy) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(Errc::malformed_document, e.what());
  }
  if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_string() || !doc.contains("entries") ||
      !doc["entries"].is_array()) {
    throw Error(Errc::malformed_document, "lexicon needs 'version' and 'entries'");
  }
  Lexicon lex;
  lex.version_ = doc["version"].get<std::string>();
  for (const auto& e : doc["entries"]) {
    if (!e.is_object() || !e.contains("language") || !e.contains("phrase") || !e.contains("label") ||
        !e["language"].is_string() || !e["phrase"].is_string() || !e["label"].is_string()) {
      throw Error(Errc::malformed_document, "lexicon entry needs string language/phrase/label");
    }
    LexiconEntry entry;
    entry.language = e["language"].get<std::string>();
    if (entry.language != "*") entry.language = primary_subtag(entry.language);
    entry.phrase = e["phrase"].get<std::string>();
    entry.label = e["label"].get<std::string>();
    entry.category = taxonomy.category_of(entry.label).id;  // throws unknown_label
    const auto folded = fold_phrase(entry.phrase);
    if (text::code_point_count(folded) < 3) {
      throw Error(Errc::malformed_document, "phrase shorter than 3 characters: " + entry.phrase);
    }
    lex.entries_.push_back(std::move(entry));
    lex.insert(lex.entries_.size() - 1, folded);
  }
  return lex;
}

Lexicon default_lexicon(const Taxonomy& taxonomy) { return load_lexicon(resources::lexicon_document(), taxonomy); }

std::vector<Lexicon::Match> Lexicon::scan(std::string_view nfc_body, std::string_view language) const {
  const auto folded = text::fold_for_matching(nfc_body);
  const std::string_view hay = folded.folded;

  std::vector<const Trie*> tries;
  for (const auto& key : {primary_subtag(language), std::string("*")}) {
    if (auto it = tries_.find(key); it != tries_.end()) tries.push_back(&it->second);
  }

  auto left_ok = [&](std::size_t pos) {
    if (pos == 0) return true;
    return !text::is_word_char(text::code_point_before(hay, pos)) || !text::is_word_char(text::code_point_at(hay, pos));
  };
  auto right_ok = [&](std::size_t end) {
    if (end >= hay.size()) return true;
    return !text::is_word_char(text::code_point_at(hay, end)) ||
           !text::is_word_char(text::code_point_before(hay, end));
  };

  std::vector<Match> out;
  std::size_t pos = 0;
  while (pos < hay.size()) {
    std::size_t best_end = 0;
    long best_entry = -1;
    if (left_ok(pos)) {
      for (const auto* trie : tries) {
        std::size_t node = 0;
        for (std::size_t i = pos; i < hay.size(); ++i) {
          auto it = trie->nodes[node].next.find(static_cast<unsigned char>(hay[i]));
          if (it == trie->nodes[node].next.end()) break;
          node = it->second;
          const auto end = i + 1;
          if (trie->nodes[node].entry >= 0 && end > best_end && right_ok(end)) {
            best_end = end;
            best_entry = trie->nodes[node].entry;
          }
        }
      }
    }
    if (best_entry >= 0) {
      const auto begin = folded.src_begin[pos];
      const auto end = folded.src_end[best_end - 1];
      out.push_back({static_cast<std::size_t>(best_entry), begin, end});
      pos = best_end;
      continue;
    }
    // Next code point.
    ++pos;
    while (pos < hay.size() && (static_cast<unsigned char>(hay[pos]) & 0xC0) == 0x80) ++pos;
  }
  return out;
}

ExtractionResult lexicon_extract(const ReviewRecord& review, const Lexicon& lexicon) {
  ExtractionResult result;
  result.review_id = review.review_id;
  result.extractor_id = lexicon.extractor_id();
  result.status = ExtractionStatus::ok;
  result.attempts = 1;

  const auto body = text::nfc(review.body);
  std::set<std::string> seen;
  for (const auto& m : lexicon.scan(body, review.language)) {
    const auto& entry = lexicon.entries()[m.entry];
    auto snippet = body.substr(m.begin, m.end - m.begin);
    if (text::code_point_count(snippet) < 3) continue;
    if (!seen.insert(entry.label).second) continue;
    result.issues.push_back({entry.label, std::move(snippet), entry.category});
  }
  return result;
}

}  // namespace airlens
