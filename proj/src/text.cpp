#include "nonword/text.hpp"

#include <algorithm>

#include "nonword/errors.hpp"

namespace nonword {

namespace utf8 {

namespace {

// Returns the decoded character and advances `pos`, or nullopt on a bad
// sequence (overlong, surrogate, truncated, out of range).
std::optional<char32_t> next(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  std::size_t len;
  char32_t cp;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return std::nullopt;
  }
  if (pos + len > s.size()) return std::nullopt;
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return std::nullopt;
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return std::nullopt;
  pos += len;
  return cp;
}

}  // namespace

std::u32string decode(std::string_view bytes, std::size_t base_offset) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t at = pos;
    auto cp = next(bytes, pos);
    if (!cp) throw InputFormatError("invalid UTF-8 sequence", base_offset + at);
    out.push_back(*cp);
  }
  return out;
}

std::optional<std::u32string> try_decode(std::string_view bytes) {
  std::u32string out;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    auto cp = next(bytes, pos);
    if (!cp) return std::nullopt;
    out.push_back(*cp);
  }
  return out;
}

void append(std::string& out, char32_t c) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size() * 2);
  for (char32_t c : text) append(out, c);
  return out;
}

std::string encode(char32_t c) {
  std::string out;
  append(out, c);
  return out;
}

}  // namespace utf8

bool is_word_char(char32_t c) {
  if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z')) return true;
  if (c < 0xC0) return c == 0xAA || c == 0xB5 || c == 0xBA;
  if (c <= 0x24F) return c != 0xD7 && c != 0xF7;  // Latin-1 letters, Latin Extended-A/B
  if (c >= 0x250 && c <= 0x2AF) return true;      // IPA
  if (c >= 0x300 && c <= 0x36F) return true;      // combining diacritics
  if (c >= 0x370 && c <= 0x3FF) return c != 0x37E && c != 0x387;
  if (c >= 0x400 && c <= 0x52F) return c != 0x482;
  if (c >= 0x5B0 && c <= 0x5EA) return c != 0x5BE && c != 0x5C0 && c != 0x5C3 && c != 0x5C6;
  if (c >= 0x610 && c <= 0x61A) return true;
  if (c >= 0x620 && c <= 0x65F) return true;  // Arabic letters and harakat
  if (c == 0x670) return true;                // superscript alef
  if (c >= 0x671 && c <= 0x6D3) return true;
  if (c >= 0x1E00 && c <= 0x1EFF) return true;  // Latin Extended Additional
  return false;
}

char32_t latin_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 0x20;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  return c;
}

std::string latin_lower(std::string_view utf8_text) {
  auto decoded = utf8::decode(utf8_text);
  for (auto& c : decoded) c = latin_lower(c);
  return utf8::encode(decoded);
}

Alphabet::Alphabet(std::u32string letters) : letters_(std::move(letters)) {
  if (letters_.empty()) throw RangeError("alphabet must not be empty");
  if (letters_.size() > kMaxSize) throw RangeError("alphabet larger than 255 characters");
  latin1_index_.fill(-1);
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    const char32_t c = letters_[i];
    if (index_of(c)) throw RangeError("duplicate alphabet character '" + utf8::encode(c) + "'");
    if (c < 256) {
      latin1_index_[c] = static_cast<std::int16_t>(i);
    } else {
      auto pos = std::lower_bound(other_index_.begin(), other_index_.end(), c,
                                  [](const auto& e, char32_t v) { return e.first < v; });
      other_index_.insert(pos, {c, static_cast<std::uint8_t>(i)});
    }
  }
}

Alphabet Alphabet::from_utf8(std::string_view letters) { return Alphabet(utf8::decode(letters)); }

Alphabet Alphabet::swedish() { return Alphabet(U"abcdefghijklmnopqrstuvwxyzåäö"); }

Alphabet Alphabet::latin() { return Alphabet(U"abcdefghijklmnopqrstuvwxyz"); }

std::optional<std::uint8_t> Alphabet::index_of(char32_t c) const {
  if (c < 256) {
    const auto i = latin1_index_[c];
    if (i < 0) return std::nullopt;
    return static_cast<std::uint8_t>(i);
  }
  auto pos = std::lower_bound(other_index_.begin(), other_index_.end(), c,
                              [](const auto& e, char32_t v) { return e.first < v; });
  if (pos == other_index_.end() || pos->first != c) return std::nullopt;
  return pos->second;
}

char32_t Alphabet::fold(char32_t c) const {
  if (contains(c)) return c;
  const char32_t lower = latin_lower(c);
  if (lower != c && contains(lower)) return lower;
  return c;
}

std::optional<std::vector<std::uint8_t>> Alphabet::indices(std::u32string_view text) const {
  std::vector<std::uint8_t> out;
  out.reserve(text.size());
  for (char32_t c : text) {
    auto i = index_of(c);
    if (!i) return std::nullopt;
    out.push_back(*i);
  }
  return out;
}

std::uint32_t Alphabet::rank(char32_t c) const {
  if (auto i = index_of(c)) return *i;
  return static_cast<std::uint32_t>(kMaxSize) + c;
}

bool Alphabet::less(std::u32string_view a, std::u32string_view b) const {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [this](char32_t x, char32_t y) { return rank(x) < rank(y); });
}

bool Alphabet::less_utf8(std::string_view a, std::string_view b) const {
  return less(utf8::decode(a), utf8::decode(b));
}

}  // namespace nonword
