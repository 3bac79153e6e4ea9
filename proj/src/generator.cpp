#include "nonword/generator.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <unordered_set>

#include "nonword/errors.hpp"

namespace nonword {

std::string_view provenance_name(Provenance p) { return p == Provenance::Exhaustive ? "exhaustive" : "sampled"; }

Candidate Candidate::make(std::string text, Provenance provenance) {
  Candidate c;
  c.length = utf8::decode(text).size();
  c.text = std::move(text);
  c.provenance = provenance;
  return c;
}

ExhaustiveStream::ExhaustiveStream(Alphabet alphabet, std::size_t length)
    : alphabet_(std::move(alphabet)), length_(length) {
  if (length < kMinLength || length > kMaxExhaustiveLength) {
    throw RangeError("exhaustive generation covers lengths 2-5; use sample_batch for length " +
                     std::to_string(length));
  }
}

std::uint64_t ExhaustiveStream::size() const {
  std::uint64_t n = 1;
  for (std::size_t i = 0; i < length_; ++i) n *= alphabet_.size();
  return n;
}

ExhaustiveStream::iterator::iterator(const Alphabet* alphabet, std::size_t length)
    : alphabet_(alphabet), digits_(length, 0), done_(false) {
  render();
}

void ExhaustiveStream::iterator::render() {
  current_.clear();
  for (auto d : digits_) utf8::append(current_, alphabet_->at(d));
}

ExhaustiveStream::iterator& ExhaustiveStream::iterator::operator++() {
  const auto base = alphabet_->size();
  for (std::size_t i = digits_.size(); i-- > 0;) {
    if (++digits_[i] < base) {
      render();
      return *this;
    }
    digits_[i] = 0;
  }
  done_ = true;
  return *this;
}

Candidate sample_word(const PositionalNgramModel& model, std::size_t target_length, Rng& rng,
                      std::size_t max_restarts) {
  if (target_length < kMinSampledLength || target_length > kMaxLength) {
    throw RangeError("sampled generation covers lengths 6-11, got " + std::to_string(target_length));
  }
  if (max_restarts < 1) throw RangeError("max_restarts must be at least 1");
  const auto starts = model.continuations(U"", Zone::Initial);
  if (starts.empty()) throw GenerationExhausted("model has no word-initial characters");

  // Uniform over observed initial characters, taken in alphabet order.
  std::u32string initials;
  for (const auto& c : starts) initials.push_back(c.character);
  std::sort(initials.begin(), initials.end(), [&](char32_t a, char32_t b) {
    return *model.alphabet().index_of(a) < *model.alphabet().index_of(b);
  });

  const std::size_t max_stub = static_cast<std::size_t>(model.order() - 1);
  std::u32string word;
  for (std::size_t attempt = 0; attempt <= max_restarts; ++attempt) {
    word.assign(1, initials[rng.below(initials.size())]);
    while (word.size() < target_length) {
      const std::size_t i = word.size();
      const std::size_t stub_len = std::min(i, max_stub);
      auto c = model.next(std::u32string_view(word).substr(i - stub_len), zone_of(i, target_length), rng);
      if (!c) break;
      word.push_back(*c);
    }
    if (word.size() == target_length) return Candidate::make(utf8::encode(word), Provenance::Sampled);
  }
  throw GenerationExhausted("no word of length " + std::to_string(target_length) + " after " +
                            std::to_string(max_restarts) + " restarts");
}

std::vector<Candidate> sample_batch(const PositionalNgramModel& model, std::size_t target_length, std::size_t count,
                                    Rng& rng, std::size_t max_attempts) {
  if (count < 1) throw RangeError("count must be at least 1");
  if (max_attempts == 0) max_attempts = 50 * count;
  std::vector<Candidate> out;
  std::unordered_set<std::string> seen;
  for (std::size_t attempt = 0; out.size() < count; ++attempt) {
    if (attempt == max_attempts) {
      std::vector<std::string> words;
      for (const auto& c : out) words.push_back(c.text);
      throw PartialResultError("only " + std::to_string(out.size()) + " of " + std::to_string(count) +
                                   " distinct words after " + std::to_string(max_attempts) + " attempts",
                               std::move(words));
    }
    auto candidate = sample_word(model, target_length, rng);
    if (seen.insert(candidate.text).second) out.push_back(std::move(candidate));
  }
  return out;
}

namespace {

constexpr std::size_t kShardSize = 64;

struct Shard {
  std::vector<Candidate> words;
  std::exception_ptr failure;  // raised after `words`
};

Shard run_shard(const PositionalNgramModel& model, std::size_t target_length, std::uint64_t seed,
                std::uint64_t index) {
  Shard shard;
  Rng rng = Rng::derive(seed, index);
  try {
    for (std::size_t i = 0; i < kShardSize; ++i) shard.words.push_back(sample_word(model, target_length, rng));
  } catch (...) {
    shard.failure = std::current_exception();
  }
  return shard;
}

}  // namespace

std::vector<Candidate> sample_batch_sharded(const PositionalNgramModel& model, std::size_t target_length,
                                            std::size_t count, std::uint64_t seed, unsigned workers,
                                            std::size_t max_attempts) {
  if (count < 1) throw RangeError("count must be at least 1");
  if (target_length < kMinSampledLength || target_length > kMaxLength) {
    throw RangeError("sampled generation covers lengths 6-11, got " + std::to_string(target_length));
  }
  if (max_attempts == 0) max_attempts = 50 * count;
  workers = std::max(1u, workers);

  std::vector<Candidate> out;
  std::unordered_set<std::string> seen;
  std::size_t attempts = 0;
  std::uint64_t next_shard = 0;
  auto partial = [&] {
    std::vector<std::string> words;
    for (const auto& c : out) words.push_back(c.text);
    return PartialResultError("only " + std::to_string(out.size()) + " of " + std::to_string(count) +
                                  " distinct words after " + std::to_string(max_attempts) + " attempts",
                              std::move(words));
  };

  while (true) {
    // Enough shards to cover the remaining attempts, capped at one per worker.
    const std::size_t budget = max_attempts - attempts;
    const std::size_t wave = std::min<std::size_t>(workers, (budget + kShardSize - 1) / kShardSize);
    std::vector<Shard> shards(wave);
    if (wave == 1) {
      shards[0] = run_shard(model, target_length, seed, next_shard);
    } else {
      std::vector<std::jthread> threads;
      for (std::size_t w = 0; w < wave; ++w) {
        threads.emplace_back([&, w] { shards[w] = run_shard(model, target_length, seed, next_shard + w); });
      }
    }
    next_shard += wave;

    for (auto& shard : shards) {
      for (auto& candidate : shard.words) {
        if (attempts == max_attempts) throw partial();
        ++attempts;
        if (seen.insert(candidate.text).second) {
          out.push_back(std::move(candidate));
          if (out.size() == count) return out;
        }
      }
      if (shard.failure) std::rethrow_exception(shard.failure);
    }
    if (attempts == max_attempts) throw partial();
  }
}

}  // namespace nonword
