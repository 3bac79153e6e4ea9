#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nonword {

namespace utf8 {

// Decodes UTF-8; throws InputFormatError naming the byte offset of the first
// invalid sequence. `base_offset` is added to reported offsets so callers
// decoding a stream line by line can report absolute positions.
std::u32string decode(std::string_view bytes, std::size_t base_offset = 0);

// Like decode() but returns nullopt instead of throwing.
std::optional<std::u32string> try_decode(std::string_view bytes);

void append(std::string& out, char32_t c);
std::string encode(std::u32string_view text);
std::string encode(char32_t c);

}  // namespace utf8

// True for characters that can be part of a word token: letters of the
// Latin, Greek, Cyrillic, Hebrew and Arabic blocks plus combining marks
// (Arabic vowel diacritics sit between the letters they vocalize).
bool is_word_char(char32_t c);

// Simple lowercase for ASCII and Latin-1 uppercase letters; everything else
// is returned unchanged.
char32_t latin_lower(char32_t c);
std::string latin_lower(std::string_view utf8_text);

// An ordered character set. Order matters: it defines exhaustive enumeration
// order and every alphabetical tie-break in the library.
class Alphabet {
 public:
  static constexpr std::size_t kMaxSize = 255;

  explicit Alphabet(std::u32string letters);
  static Alphabet from_utf8(std::string_view letters);

  // a-z followed by å, ä, ö (29 letters, Swedish collation order).
  static Alphabet swedish();
  // a-z.
  static Alphabet latin();

  std::size_t size() const { return letters_.size(); }
  const std::u32string& letters() const { return letters_; }
  std::string to_utf8() const { return utf8::encode(letters_); }

  bool contains(char32_t c) const { return index_of(c).has_value(); }
  std::optional<std::uint8_t> index_of(char32_t c) const;
  char32_t at(std::size_t index) const { return letters_[index]; }

  // Maps a character to its alphabet member after simple lowercasing; only
  // case pairs of declared members are folded.
  char32_t fold(char32_t c) const;

  // Encodes `text` as alphabet indices; nullopt if any character is foreign.
  std::optional<std::vector<std::uint8_t>> indices(std::u32string_view text) const;

  // Lexicographic comparison in alphabet order. Characters outside the
  // alphabet sort after all members, by code point.
  bool less(std::u32string_view a, std::u32string_view b) const;
  bool less_utf8(std::string_view a, std::string_view b) const;

  bool operator==(const Alphabet& other) const { return letters_ == other.letters_; }

 private:
  std::uint32_t rank(char32_t c) const;

  std::u32string letters_;
  std::array<std::int16_t, 256> latin1_index_{};
  std::vector<std::pair<char32_t, std::uint8_t>> other_index_;  // sorted by char
};

}  // namespace nonword
