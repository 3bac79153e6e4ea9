#pragma once

#include <cstdint>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "nonword/lm.hpp"
#include "nonword/rng.hpp"
#include "nonword/text.hpp"

namespace nonword {

enum class Provenance { Exhaustive, Sampled };

std::string_view provenance_name(Provenance p);

inline constexpr std::size_t kMinLength = 2;
inline constexpr std::size_t kMaxExhaustiveLength = 5;
inline constexpr std::size_t kMinSampledLength = 6;
inline constexpr std::size_t kMaxLength = 11;

struct Candidate {
  std::string text;  // UTF-8
  std::size_t length = 0;
  Provenance provenance = Provenance::Sampled;
  std::map<std::string, double> scores;  // model id -> log-likelihood

  static Candidate make(std::string text, Provenance provenance);
};

// Every string of a fixed length over an alphabet, in lexicographic alphabet
// order, produced lazily.
class ExhaustiveStream {
 public:
  // Throws RangeError unless 2 <= length <= 5.
  ExhaustiveStream(Alphabet alphabet, std::size_t length);

  std::uint64_t size() const;

  class iterator {
   public:
    using value_type = std::string;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    const std::string& operator*() const { return current_; }
    const std::string* operator->() const { return &current_; }
    iterator& operator++();
    void operator++(int) { ++*this; }
    bool operator==(std::default_sentinel_t) const { return done_; }

   private:
    friend class ExhaustiveStream;
    iterator(const Alphabet* alphabet, std::size_t length);
    void render();

    const Alphabet* alphabet_ = nullptr;
    std::vector<std::uint8_t> digits_;
    std::string current_;
    bool done_ = true;
  };

  iterator begin() const { return iterator(&alphabet_, length_); }
  std::default_sentinel_t end() const { return {}; }

 private:
  Alphabet alphabet_;
  std::size_t length_;
};

inline ExhaustiveStream exhaustive(Alphabet alphabet, std::size_t length) {
  return ExhaustiveStream(std::move(alphabet), length);
}

inline constexpr std::size_t kDefaultMaxRestarts = 1000;

// Samples one word of `target_length` (6..11). The first character is drawn
// uniformly from characters seen word-initially; each following character
// comes from model.next(). A dead end restarts the whole word. Throws
// GenerationExhausted after `max_restarts` failed attempts.
Candidate sample_word(const PositionalNgramModel& model, std::size_t target_length, Rng& rng,
                      std::size_t max_restarts = kDefaultMaxRestarts);

// `count` distinct sampled words in order of first generation; duplicates are
// redrawn. max_attempts = 0 means 50 * count. Throws PartialResultError with
// the words produced so far when attempts run out.
std::vector<Candidate> sample_batch(const PositionalNgramModel& model, std::size_t target_length, std::size_t count,
                                    Rng& rng, std::size_t max_attempts = 0);

// Seed-addressed variant of sample_batch that splits the work into fixed
// shards (shard i draws from Rng::derive(seed, i)) and runs them on
// `workers` threads. Shards are merged in index order, so the result depends
// only on the seed, never on the worker count.
std::vector<Candidate> sample_batch_sharded(const PositionalNgramModel& model, std::size_t target_length,
                                            std::size_t count, std::uint64_t seed, unsigned workers = 1,
                                            std::size_t max_attempts = 0);

}  // namespace nonword
