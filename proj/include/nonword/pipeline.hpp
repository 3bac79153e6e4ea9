#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "nonword/corpus.hpp"
#include "nonword/filter.hpp"
#include "nonword/lm.hpp"
#include "nonword/ranker.hpp"

namespace nonword {

struct RankingModel {
  std::string id;
  const PositionalNgramModel* model = nullptr;
};

struct GenerateOptions {
  std::size_t length = 6;
  std::size_t count = 20;
  std::uint64_t seed = 0;
  // Candidates kept for (re-)ranking: sampled words for lengths 6-11, the
  // best-scoring filtered strings for lengths 2-5.
  std::size_t pool_size = 10000;
  unsigned workers = 1;
};

struct GenerateResult {
  RankedList ranked;  // at most `count` items, scored by the final model
  FilterReport report;
};

// generate -> filter -> rank [-> rerank]. Lengths 2-5 are enumerated
// exhaustively, filtered against the lexicon and the low-probability
// threshold, and the best `pool_size` kept; lengths 6-11 are sampled from
// `base`, filtered against the lexicon and ranked. With `l1` set the pool is
// re-ranked by that model before truncating to `count`.
GenerateResult generate_nonwords(const RankingModel& base, const std::optional<RankingModel>& l1,
                                 const Lexicon& lexicon, const GenerateOptions& options);

// The filtered, base-ranked pool for an exhaustive length; the expensive
// part of generate_nonwords for lengths 2-5, exposed so callers can cache it.
GenerateResult exhaustive_pool(const RankingModel& base, const Lexicon& lexicon, std::size_t length,
                               std::size_t pool_size);

GenerateResult finish_ranking(GenerateResult pool, const std::optional<RankingModel>& l1, std::size_t count);

}  // namespace nonword
