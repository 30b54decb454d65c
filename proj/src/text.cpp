#include "airlens/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "airlens/error.hpp"

namespace airlens::text {

namespace {

const icu::Normalizer2& nfc_instance() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || n == nullptr) {
    throw Error(Errc::io, "ICU NFC normalizer unavailable");
  }
  return *n;
}

std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  int32_t i = 0;
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const auto n = static_cast<int32_t>(s.size());
  while (i < n) {
    UChar32 c;
    U8_NEXT(p, i, n, c);
    out.push_back(c < 0 ? U'�' : static_cast<char32_t>(c));
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  uint8_t buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool err = false;
  U8_APPEND(buf, len, U8_MAX_LENGTH, static_cast<UChar32>(cp), err);
  out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(len));
}

bool is_space(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)); }

bool is_punct_or_space(char32_t cp) {
  return is_space(cp) || u_ispunct(static_cast<UChar32>(cp)) ||
         u_charType(static_cast<UChar32>(cp)) == U_MATH_SYMBOL ||
         u_charType(static_cast<UChar32>(cp)) == U_OTHER_SYMBOL;
}

}  // namespace

bool is_valid_utf8(std::string_view s) noexcept {
  int32_t i = 0;
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const auto n = static_cast<int32_t>(s.size());
  while (i < n) {
    UChar32 c;
    U8_NEXT(p, i, n, c);
    if (c < 0) return false;
  }
  return true;
}

std::string nfc(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const auto& norm = nfc_instance();
  auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  if (norm.isNormalized(u, status) && U_SUCCESS(status)) return std::string(s);
  status = U_ZERO_ERROR;
  icu::UnicodeString normalized = norm.normalize(u, status);
  if (U_FAILURE(status)) throw Error(Errc::undecodable_stream, "NFC normalization failed");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

std::string_view trim(std::string_view s) noexcept {
  std::size_t begin = 0;
  while (begin < s.size()) {
    const auto before = begin;
    int32_t i = static_cast<int32_t>(begin);
    UChar32 c;
    U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i, static_cast<int32_t>(s.size()), c);
    if (c < 0 || !is_space(static_cast<char32_t>(c))) {
      begin = before;
      break;
    }
    begin = static_cast<std::size_t>(i);
  }
  std::size_t end = s.size();
  while (end > begin) {
    int32_t i = static_cast<int32_t>(end);
    UChar32 c;
    U8_PREV(reinterpret_cast<const uint8_t*>(s.data()), static_cast<int32_t>(begin), i, c);
    if (c < 0 || !is_space(static_cast<char32_t>(c))) break;
    end = static_cast<std::size_t>(i);
  }
  return s.substr(begin, end - begin);
}

std::size_t code_point_count(std::string_view s) noexcept {
  std::size_t count = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++count;
  }
  return count;
}

std::string normalize_label(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const auto& norm = nfc_instance();
  auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u = norm.normalize(u, status);
  u.foldCase(U_FOLD_CASE_DEFAULT);
  u = norm.normalize(u, status);
  if (U_FAILURE(status)) throw Error(Errc::undecodable_stream, "label normalization failed");
  std::string folded;
  u.toUTF8String(folded);

  auto cps = decode(folded);
  std::size_t b = 0;
  std::size_t e = cps.size();
  while (b < e && is_punct_or_space(cps[b])) ++b;
  while (e > b && is_punct_or_space(cps[e - 1])) --e;

  std::string out;
  out.reserve(folded.size());
  bool pending_space = false;
  for (std::size_t i = b; i < e; ++i) {
    if (is_space(cps[i])) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    append_utf8(out, cps[i]);
  }
  return out;
}

FoldedText fold_for_matching(std::string_view source) {
  FoldedText out;
  out.folded.reserve(source.size());
  out.src_begin.reserve(source.size());
  out.src_end.reserve(source.size());
  const auto* p = reinterpret_cast<const uint8_t*>(source.data());
  const auto n = static_cast<int32_t>(source.size());
  int32_t i = 0;
  bool in_space = false;
  while (i < n) {
    const auto start = static_cast<std::size_t>(i);
    UChar32 c;
    U8_NEXT(p, i, n, c);
    const auto stop = static_cast<std::size_t>(i);
    if (c < 0) c = 0xFFFD;
    if (is_space(static_cast<char32_t>(c))) {
      if (in_space) {
        // Extend the recorded span of the collapsed run.
        out.src_end.back() = stop;
        continue;
      }
      in_space = true;
      out.folded.push_back(' ');
      out.src_begin.push_back(start);
      out.src_end.push_back(stop);
      continue;
    }
    in_space = false;
    const auto before = out.folded.size();
    append_utf8(out.folded, static_cast<char32_t>(u_foldCase(c, U_FOLD_CASE_DEFAULT)));
    for (auto k = before; k < out.folded.size(); ++k) {
      out.src_begin.push_back(start);
      out.src_end.push_back(stop);
    }
  }
  return out;
}

bool is_word_char(char32_t cp) noexcept {
  const auto c = static_cast<UChar32>(cp);
  if (u_isalnum(c)) return true;
  const auto type = u_charType(c);
  return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK || type == U_ENCLOSING_MARK;
}

char32_t code_point_at(std::string_view s, std::size_t pos) noexcept {
  if (pos >= s.size()) return 0;
  int32_t i = static_cast<int32_t>(pos);
  UChar32 c;
  U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i, static_cast<int32_t>(s.size()), c);
  return c < 0 ? U'�' : static_cast<char32_t>(c);
}

char32_t code_point_before(std::string_view s, std::size_t pos) noexcept {
  if (pos == 0 || pos > s.size()) return 0;
  int32_t i = static_cast<int32_t>(pos);
  UChar32 c;
  U8_PREV(reinterpret_cast<const uint8_t*>(s.data()), 0, i, c);
  return c < 0 ? U'�' : static_cast<char32_t>(c);
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  return out;
}

}  // namespace airlens::text
