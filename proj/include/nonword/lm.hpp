#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nonword/corpus.hpp"
#include "nonword/rng.hpp"
#include "nonword/text.hpp"

namespace nonword {

// Where in a word a character sits. FINAL is the last character; otherwise
// the first three positions are INITIAL and the rest MEDIAL.
enum class Zone : std::uint8_t { Initial = 0, Medial = 1, Final = 2 };

Zone zone_of(std::size_t index, std::size_t length);
std::string_view zone_name(Zone zone);
std::optional<Zone> parse_zone(std::string_view name);

struct Continuation {
  char32_t character;
  double log_likelihood;  // natural log, conditioned on (zone, stub)
};

// Algorithm used to pick from an ordered continuation list: walk the list,
// accept each element with probability 1/2, fall through to the last one.
// Returns the chosen rank, or nullopt for an empty list.
std::optional<std::size_t> choose_continuation(std::size_t k, Rng& rng);

// Character n-gram model whose counts are conditioned on the zone of the
// predicted character. Immutable after train()/deserialize(); safe to share
// between threads.
class PositionalNgramModel {
 public:
  static constexpr int kMaxOrder = 8;
  // ln(1e-7), charged when no context in the zone has seen the character.
  static const double kFloorLogProb;

  static PositionalNgramModel train(const WordFrequencyTable& table, int order = 4);

  // Model file: `posgram v1 order=N alphabet=<chars>` followed by
  // `zone<TAB>context<TAB>char<TAB>count` lines. Throws FormatError with the
  // line and byte offset of the first problem.
  static PositionalNgramModel deserialize(std::istream& in);
  void serialize(std::ostream& out) const;

  int order() const { return order_; }
  const Alphabet& alphabet() const { return alphabet_; }

  std::uint64_t count(Zone zone, std::u32string_view context, char32_t c) const;
  std::uint64_t total(Zone zone, std::u32string_view context) const;
  std::size_t context_count() const { return exact_.size(); }

  // Characters observed after exactly (zone, stub), most probable first,
  // ties in alphabet order. Empty when the context was never seen.
  std::span<const Continuation> continuations(std::u32string_view stub, Zone zone) const;

  // One generation step; nullopt when there is nothing to continue with.
  std::optional<char32_t> next(std::u32string_view stub, Zone zone, Rng& rng) const;

  // Sum of per-character log probabilities, each taken from the longest
  // context suffix seen in the same zone. A character that context never
  // produced, or a zone with no contexts at all, contributes the floor.
  // Throws ScoringError for words shorter than 2 or with foreign characters.
  double score(std::u32string_view word) const;
  double score(std::string_view utf8_word) const;
  // score() divided by the word's length.
  double mean_score(std::string_view utf8_word) const;

  struct Entry {
    Zone zone;
    std::u32string context;
    char32_t character;
    std::uint64_t count;
  };
  // All stored counts in serialization order.
  std::vector<Entry> entries() const;

 private:
  using Key = std::uint64_t;

  struct ContextStats {
    std::vector<std::pair<std::uint8_t, std::uint64_t>> counts;  // by alphabet index
    std::uint64_t total = 0;
    std::vector<Continuation> ordered;

    std::uint64_t count_of(std::uint8_t index) const;
  };

  PositionalNgramModel(Alphabet alphabet, int order) : alphabet_(std::move(alphabet)), order_(order) {}

  static Key make_key(Zone zone, const std::uint8_t* context, std::size_t length);
  void add(Zone zone, const std::uint8_t* context, std::size_t length, std::uint8_t c, std::uint64_t n);
  void finalize();
  const ContextStats* find_exact(Zone zone, std::u32string_view context) const;

  Alphabet alphabet_;
  int order_;
  std::unordered_map<Key, ContextStats> exact_;
  // Backoff statistics: counts aggregated over every context sharing a suffix.
  std::unordered_map<Key, ContextStats> suffix_;
};

}  // namespace nonword
