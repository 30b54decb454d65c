#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace airlens::text {

bool is_valid_utf8(std::string_view s) noexcept;

// Unicode NFC. Input must be valid UTF-8.
std::string nfc(std::string_view s);

// Strips Unicode whitespace at both ends.
std::string_view trim(std::string_view s) noexcept;

std::size_t code_point_count(std::string_view s) noexcept;

// Canonical form used for label and alias lookup:
// NFC, full case folding, internal whitespace collapsed to one space,
// leading/trailing punctuation and whitespace removed. Idempotent.
std::string normalize_label(std::string_view s);

// Case-folded, whitespace-collapsed view of a text that remembers where each
// output byte came from in the source, so matches can be mapped back.
struct FoldedText {
  std::string folded;
  // For each byte of `folded`: byte range [src_begin, src_end) of the source
  // code point (or whitespace run) that produced it.
  std::vector<std::size_t> src_begin;
  std::vector<std::size_t> src_end;
};

FoldedText fold_for_matching(std::string_view source);

// Letter, digit or combining mark: the characters that make up a word when
// checking phrase boundaries.
bool is_word_char(char32_t cp) noexcept;

// Decodes the code point that starts at byte `pos`, or the one that ends just
// before it. Returns U+FFFD-free best effort for valid UTF-8 input.
char32_t code_point_at(std::string_view s, std::size_t pos) noexcept;
char32_t code_point_before(std::string_view s, std::size_t pos) noexcept;

std::string ascii_lower(std::string_view s);

}  // namespace airlens::text
