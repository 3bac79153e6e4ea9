#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "nonword/text.hpp"

namespace nonword {

// Training word counts. Keys are lowercase, at least two characters long and
// drawn entirely from the table's alphabet; counts are >= 1.
class WordFrequencyTable {
 public:
  explicit WordFrequencyTable(Alphabet alphabet) : alphabet_(std::move(alphabet)) {}

  // Throws RangeError if `word` violates the table invariants or count is 0.
  void add(std::string_view word, std::uint64_t count = 1);
  void merge(const WordFrequencyTable& other);

  const Alphabet& alphabet() const { return alphabet_; }
  const std::map<std::string, std::uint64_t>& entries() const { return entries_; }
  std::uint64_t count(const std::string& word) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::uint64_t total_tokens() const;

  bool operator==(const WordFrequencyTable& other) const {
    return alphabet_ == other.alphabet_ && entries_ == other.entries_;
  }

 private:
  Alphabet alphabet_;
  std::map<std::string, std::uint64_t> entries_;
};

// Tokenizes running text: tokens are maximal runs of word characters,
// folded to lowercase; tokens with characters outside `alphabet` or shorter
// than two characters are dropped.
WordFrequencyTable extract_words(std::istream& text, const Alphabet& alphabet);
WordFrequencyTable extract_words(std::string_view text, const Alphabet& alphabet);

// Reads a `word<TAB>count` frequency list. Words are folded like corpus
// tokens; words that would not survive extract_words are skipped.
WordFrequencyTable load_word_counts(std::istream& in, const Alphabet& alphabet);

// Existing word forms plus an exclusion list (names, abbreviations).
// Membership is exact string match after lowercasing.
class Lexicon {
 public:
  Lexicon() = default;

  bool contains(std::string_view word) const;
  bool is_word(std::string_view word) const;
  bool is_excluded(std::string_view word) const;

  const std::unordered_set<std::string>& words() const { return words_; }
  const std::unordered_set<std::string>& exclusions() const { return exclusions_; }
  std::size_t size() const { return words_.size(); }

  // Word forms (not exclusions) with exactly `length` characters, sorted.
  std::vector<std::string> words_of_length(std::size_t length) const;

  void add_word(std::string_view word);
  void add_exclusion(std::string_view word);

 private:
  std::unordered_set<std::string> words_;
  std::unordered_set<std::string> exclusions_;
};

// One form per line; blank lines and lines starting with # are skipped.
Lexicon load_lexicon(std::istream& words);
Lexicon load_lexicon(std::istream& words, std::istream& exclusions);

struct TransliterationRule {
  std::u32string source;
  std::string replacement;
};

// Greedy longest-match rewrite table for bringing another script onto the
// shared Latin alphabet.
class TransliterationTable {
 public:
  TransliterationTable(std::vector<TransliterationRule> rules, bool drop_unmapped,
                       Alphabet target = Alphabet::latin());

  // Parses the `source<TAB>replacement` file format with `#` comments and a
  // `!drop_unmapped true|false` header line.
  static TransliterationTable parse(std::istream& in, Alphabet target = Alphabet::latin());

  // The scheme shipped in data/translit/ar_default.tsv.
  static TransliterationTable arabic_default();

  const std::vector<TransliterationRule>& rules() const { return rules_; }
  bool drop_unmapped() const { return drop_unmapped_; }
  const Alphabet& target() const { return target_; }

  // Longest rule whose source matches `text` at `pos`, or nullptr.
  const TransliterationRule* match(std::u32string_view text, std::size_t pos) const;

 private:
  std::vector<TransliterationRule> rules_;
  bool drop_unmapped_;
  Alphabet target_;
  // first source character -> rule indices, longest source first
  std::map<char32_t, std::vector<std::size_t>> by_first_;
};

// Left-to-right longest-match transliteration. Characters that cannot be
// part of a word become word boundaries: newlines are kept and anything
// else becomes a space, so the output feeds extract_words unchanged.
// Throws TransliterationError for an unmapped letter outside the target
// alphabet when the table does not drop unmapped characters.
std::string transliterate(std::string_view text, const TransliterationTable& table,
                          std::size_t base_offset = 0);
void transliterate(std::istream& in, std::ostream& out, const TransliterationTable& table);

// load_word_counts over a list in another script: each word is
// transliterated first, and words that come out empty or split are skipped.
WordFrequencyTable load_word_counts(std::istream& in, const Alphabet& alphabet, const TransliterationTable& table);

}  // namespace nonword
