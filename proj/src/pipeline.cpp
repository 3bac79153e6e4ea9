#include "nonword/pipeline.hpp"

#include <algorithm>
#include <queue>

#include "nonword/errors.hpp"
#include "nonword/generator.hpp"

namespace nonword {

GenerateResult exhaustive_pool(const RankingModel& base, const Lexicon& lexicon, std::size_t length,
                               std::size_t pool_size) {
  const PositionalNgramModel& model = *base.model;
  const Alphabet& alphabet = model.alphabet();
  const double threshold = default_threshold(model, lexicon, length);

  struct Scored {
    double score;
    std::u32string text;
  };
  // `a` ranks ahead of `b`
  auto ahead = [&](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return alphabet.less(a.text, b.text);
  };
  // max-heap on "ahead" keeps the worst retained item on top
  std::priority_queue<Scored, std::vector<Scored>, decltype(ahead)> best(ahead);

  LexiconFilter lexicon_filter(lexicon);
  FilterReport low;
  for (const auto& text : exhaustive(alphabet, length)) {
    if (!lexicon_filter.keep(text)) continue;
    ++low.input_count;
    auto decoded = utf8::decode(text);
    const double score = model.score(std::u32string_view(decoded));
    if (score / static_cast<double>(length) < threshold) {
      ++low.removed_low_probability;
      continue;
    }
    ++low.output_count;
    Scored item{score, std::move(decoded)};
    if (best.size() < pool_size) {
      best.push(std::move(item));
    } else if (pool_size > 0 && ahead(item, best.top())) {
      best.pop();
      best.push(std::move(item));
    }
  }

  std::vector<Candidate> pool;
  pool.reserve(best.size());
  while (!best.empty()) {
    pool.push_back(Candidate::make(utf8::encode(best.top().text), Provenance::Exhaustive));
    best.pop();
  }
  GenerateResult result;
  result.ranked = rank(std::move(pool), model, base.id);
  result.report = lexicon_filter.report().then(low);
  return result;
}

GenerateResult finish_ranking(GenerateResult pool, const std::optional<RankingModel>& l1, std::size_t count) {
  if (l1) pool.ranked = rerank(pool.ranked, *l1->model, l1->id);
  if (pool.ranked.items.size() > count) pool.ranked.items.resize(count);
  return pool;
}

GenerateResult generate_nonwords(const RankingModel& base, const std::optional<RankingModel>& l1,
                                 const Lexicon& lexicon, const GenerateOptions& options) {
  if (options.count < 1) throw RangeError("count must be at least 1");
  if (options.length < kMinLength || options.length > kMaxLength) {
    throw RangeError("length must be between 2 and 11");
  }
  const std::size_t pool_size = std::max(options.pool_size, options.count);
  if (options.length <= kMaxExhaustiveLength) {
    return finish_ranking(exhaustive_pool(base, lexicon, options.length, pool_size), l1, options.count);
  }
  auto sampled = sample_batch_sharded(*base.model, options.length, pool_size, options.seed, options.workers);
  auto filtered = filter_lexicon(std::move(sampled), lexicon);
  GenerateResult result;
  result.ranked = rank(std::move(filtered.candidates), *base.model, base.id);
  result.report = filtered.report;
  return finish_ranking(std::move(result), l1, options.count);
}

}  // namespace nonword
