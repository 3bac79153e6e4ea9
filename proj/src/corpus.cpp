#include "nonword/corpus.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "nonword/errors.hpp"

namespace nonword {

extern const char* const kArabicDefaultTable;  // generated from data/translit

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

// Folds and validates one token; appends it to `table` if it qualifies.
void add_token(std::u32string& token, const Alphabet& alphabet, WordFrequencyTable& table) {
  if (token.size() >= 2) {
    bool pure = true;
    for (auto& c : token) {
      c = alphabet.fold(c);
      if (!alphabet.contains(c)) {
        pure = false;
        break;
      }
    }
    if (pure) table.add(utf8::encode(token));
  }
  token.clear();
}

void extract_line(std::u32string_view line, const Alphabet& alphabet, WordFrequencyTable& table) {
  std::u32string token;
  for (char32_t c : line) {
    if (is_word_char(c)) {
      token.push_back(c);
    } else if (!token.empty()) {
      add_token(token, alphabet, table);
    }
  }
  if (!token.empty()) add_token(token, alphabet, table);
}

}  // namespace

TransliterationError::TransliterationError(char32_t character, std::size_t offset)
    : Error("no transliteration for '" + utf8::encode(character) + "' (U+" +
            [&] {
              std::ostringstream hex;
              hex << std::uppercase << std::hex << static_cast<std::uint32_t>(character);
              return hex.str();
            }() +
            ") at byte " + std::to_string(offset)),
      character_(character),
      offset_(offset) {}

void WordFrequencyTable::add(std::string_view word, std::uint64_t count) {
  if (count == 0) throw RangeError("word count must be positive");
  const auto decoded = utf8::decode(word);
  if (decoded.size() < 2) throw RangeError("training words need at least two characters: '" + std::string(word) + "'");
  if (!alphabet_.indices(decoded)) {
    throw RangeError("word '" + std::string(word) + "' has characters outside the alphabet");
  }
  entries_[std::string(word)] += count;
}

void WordFrequencyTable::merge(const WordFrequencyTable& other) {
  if (!(other.alphabet_ == alphabet_)) throw RangeError("cannot merge tables over different alphabets");
  for (const auto& [word, n] : other.entries_) entries_[word] += n;
}

std::uint64_t WordFrequencyTable::count(const std::string& word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? 0 : it->second;
}

std::uint64_t WordFrequencyTable::total_tokens() const {
  std::uint64_t total = 0;
  for (const auto& [_, n] : entries_) total += n;
  return total;
}

WordFrequencyTable extract_words(std::istream& text, const Alphabet& alphabet) {
  WordFrequencyTable table(alphabet);
  std::string line;
  std::size_t offset = 0;
  while (std::getline(text, line)) {
    extract_line(utf8::decode(line, offset), alphabet, table);
    offset += line.size() + 1;
  }
  return table;
}

WordFrequencyTable extract_words(std::string_view text, const Alphabet& alphabet) {
  WordFrequencyTable table(alphabet);
  extract_line(utf8::decode(text), alphabet, table);
  return table;
}

WordFrequencyTable load_word_counts(std::istream& in, const Alphabet& alphabet) {
  WordFrequencyTable table(alphabet);
  std::string line;
  std::size_t offset = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    strip_cr(line);
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw InputFormatError("line " + std::to_string(line_no) + ": expected word<TAB>count", line_offset);
    }
    std::uint64_t count = 0;
    const auto num = trim(std::string_view(line).substr(tab + 1));
    try {
      std::size_t used = 0;
      count = std::stoull(std::string(num), &used);
      if (used != num.size() || num.front() == '-') throw std::invalid_argument("count");
    } catch (const std::exception&) {
      throw InputFormatError("line " + std::to_string(line_no) + ": bad count", line_offset + tab + 1);
    }
    if (count == 0) continue;
    auto word = utf8::decode(line.substr(0, tab), line_offset);
    if (word.size() < 2 || !std::all_of(word.begin(), word.end(), is_word_char)) continue;
    bool pure = true;
    for (auto& c : word) {
      c = alphabet.fold(c);
      pure = pure && alphabet.contains(c);
    }
    if (pure) table.add(utf8::encode(word), count);
  }
  return table;
}

bool Lexicon::contains(std::string_view word) const { return is_word(word) || is_excluded(word); }

bool Lexicon::is_word(std::string_view word) const {
  if (words_.empty()) return false;
  return words_.count(latin_lower(word)) > 0;
}

bool Lexicon::is_excluded(std::string_view word) const {
  if (exclusions_.empty()) return false;
  return exclusions_.count(latin_lower(word)) > 0;
}

std::vector<std::string> Lexicon::words_of_length(std::size_t length) const {
  std::vector<std::string> out;
  for (const auto& w : words_) {
    if (utf8::decode(w).size() == length) out.push_back(w);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void Lexicon::add_word(std::string_view word) {
  const auto w = trim(word);
  if (!w.empty()) words_.insert(latin_lower(w));
}

void Lexicon::add_exclusion(std::string_view word) {
  const auto w = trim(word);
  if (!w.empty()) exclusions_.insert(latin_lower(w));
}

namespace {

template <typename Add>
void read_list(std::istream& in, Add add) {
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    // validate before folding so the error carries the stream offset
    utf8::decode(line, offset);
    offset += line.size() + 1;
    if (trim(line).starts_with('#')) continue;
    add(line);
  }
}

}  // namespace

Lexicon load_lexicon(std::istream& words) {
  Lexicon lexicon;
  read_list(words, [&](std::string_view w) { lexicon.add_word(w); });
  return lexicon;
}

Lexicon load_lexicon(std::istream& words, std::istream& exclusions) {
  Lexicon lexicon = load_lexicon(words);
  read_list(exclusions, [&](std::string_view w) { lexicon.add_exclusion(w); });
  return lexicon;
}

TransliterationTable::TransliterationTable(std::vector<TransliterationRule> rules, bool drop_unmapped,
                                           Alphabet target)
    : rules_(std::move(rules)), drop_unmapped_(drop_unmapped), target_(std::move(target)) {
  if (rules_.empty()) throw RangeError("transliteration table has no rules");
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto& rule = rules_[i];
    if (rule.source.empty()) throw RangeError("transliteration rule with empty source");
    const auto replacement = utf8::decode(rule.replacement);
    if (!target_.indices(replacement)) {
      throw RangeError("replacement '" + rule.replacement + "' is outside the target alphabet");
    }
    auto& bucket = by_first_[rule.source.front()];
    for (std::size_t j : bucket) {
      if (rules_[j].source == rule.source) {
        throw RangeError("duplicate transliteration source '" + utf8::encode(rule.source) + "'");
      }
    }
    bucket.push_back(i);
  }
  for (auto& [_, bucket] : by_first_) {
    std::stable_sort(bucket.begin(), bucket.end(), [&](std::size_t a, std::size_t b) {
      return rules_[a].source.size() > rules_[b].source.size();
    });
  }
}

TransliterationTable TransliterationTable::parse(std::istream& in, Alphabet target) {
  std::vector<TransliterationRule> rules;
  bool drop_unmapped = false;
  std::string line;
  std::size_t offset = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    strip_cr(line);
    utf8::decode(line, line_offset);
    if (trim(line).empty() || line.front() == '#') continue;
    if (line.front() == '!') {
      std::istringstream directive(line.substr(1));
      std::string key, value;
      directive >> key >> value;
      if (key != "drop_unmapped" || (value != "true" && value != "false")) {
        throw InputFormatError("line " + std::to_string(line_no) + ": expected '!drop_unmapped true|false'",
                               line_offset);
      }
      drop_unmapped = value == "true";
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw InputFormatError("line " + std::to_string(line_no) + ": expected source<TAB>replacement", line_offset);
    }
    rules.push_back({utf8::decode(line.substr(0, tab)), std::string(trim(line.substr(tab + 1)))});
  }
  try {
    return TransliterationTable(std::move(rules), drop_unmapped, std::move(target));
  } catch (const RangeError& e) {
    throw InputFormatError(std::string("transliteration table: ") + e.what());
  }
}

TransliterationTable TransliterationTable::arabic_default() {
  std::istringstream in(kArabicDefaultTable);
  return parse(in);
}

const TransliterationRule* TransliterationTable::match(std::u32string_view text, std::size_t pos) const {
  auto it = by_first_.find(text[pos]);
  if (it == by_first_.end()) return nullptr;
  for (std::size_t i : it->second) {
    const auto& src = rules_[i].source;
    if (text.substr(pos, src.size()) == src) return &rules_[i];
  }
  return nullptr;
}

std::string transliterate(std::string_view text, const TransliterationTable& table, std::size_t base_offset) {
  const auto decoded = utf8::decode(text, base_offset);
  std::string out;
  out.reserve(text.size());
  std::size_t byte = base_offset;
  for (std::size_t pos = 0; pos < decoded.size();) {
    if (const auto* rule = table.match(decoded, pos)) {
      out += rule->replacement;
      for (char32_t c : rule->source) byte += utf8::encode(c).size();
      pos += rule->source.size();
      continue;
    }
    const char32_t c = decoded[pos];
    if (!is_word_char(c)) {
      out.push_back(c == U'\n' ? '\n' : ' ');
    } else if (!table.drop_unmapped()) {
      const char32_t folded = table.target().fold(c);
      if (!table.target().contains(folded)) throw TransliterationError(c, byte);
      utf8::append(out, folded);
    }
    byte += utf8::encode(c).size();
    ++pos;
  }
  return out;
}

void transliterate(std::istream& in, std::ostream& out, const TransliterationTable& table) {
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    out << transliterate(line, table, offset) << '\n';
    offset += line.size() + 1;
  }
}

WordFrequencyTable load_word_counts(std::istream& in, const Alphabet& alphabet, const TransliterationTable& table) {
  std::ostringstream converted;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      converted << line << '\n';
    } else {
      converted << transliterate(std::string_view(line).substr(0, tab), table, offset) << line.substr(tab) << '\n';
    }
    offset += line.size() + 1;
  }
  std::istringstream again(converted.str());
  return load_word_counts(again, alphabet);
}

}  // namespace nonword
