#include "nonword/filter.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nonword/errors.hpp"

namespace nonword {

FilterReport FilterReport::then(const FilterReport& next) const {
  FilterReport out;
  out.input_count = input_count;
  out.removed_lexicon = removed_lexicon + next.removed_lexicon;
  out.removed_exclusion = removed_exclusion + next.removed_exclusion;
  out.removed_low_probability = removed_low_probability + next.removed_low_probability;
  out.unscorable = unscorable + next.unscorable;
  out.output_count = next.output_count;
  return out;
}

std::string FilterReport::to_key_values() const {
  std::ostringstream out;
  out << "input_count=" << input_count << '\n'
      << "removed_lexicon=" << removed_lexicon << '\n'
      << "removed_exclusion=" << removed_exclusion << '\n'
      << "removed_low_probability=" << removed_low_probability << '\n'
      << "unscorable=" << unscorable << '\n'
      << "output_count=" << output_count << '\n';
  return out.str();
}

bool LexiconFilter::keep(std::string_view text) {
  ++report_.input_count;
  if (lexicon_->is_word(text)) {
    ++report_.removed_lexicon;
    return false;
  }
  if (lexicon_->is_excluded(text)) {
    ++report_.removed_exclusion;
    return false;
  }
  ++report_.output_count;
  return true;
}

bool LowProbabilityFilter::keep(std::string_view text) {
  ++report_.input_count;
  double mean;
  try {
    mean = model_->mean_score(text);
  } catch (const ScoringError&) {
    ++report_.removed_low_probability;
    ++report_.unscorable;
    return false;
  }
  if (mean < threshold_) {
    ++report_.removed_low_probability;
    return false;
  }
  ++report_.output_count;
  return true;
}

namespace {

template <typename Filter>
FilterResult apply(std::vector<Candidate> candidates, Filter filter) {
  FilterResult result;
  for (auto& c : candidates) {
    if (filter.keep(c.text)) result.candidates.push_back(std::move(c));
  }
  result.report = filter.report();
  return result;
}

}  // namespace

FilterResult filter_lexicon(std::vector<Candidate> candidates, const Lexicon& lexicon) {
  return apply(std::move(candidates), LexiconFilter(lexicon));
}

FilterResult filter_low_probability(std::vector<Candidate> candidates, const PositionalNgramModel& model,
                                    double per_char_threshold) {
  return apply(std::move(candidates), LowProbabilityFilter(model, per_char_threshold));
}

double default_threshold(const PositionalNgramModel& model, const Lexicon& lexicon, std::size_t length,
                         double percentile) {
  if (percentile < 0.0 || percentile > 1.0) throw RangeError("percentile must be within [0, 1]");
  std::vector<double> means;
  for (const auto& word : lexicon.words()) {
    auto decoded = utf8::try_decode(word);
    if (!decoded || decoded->size() != length || length < 2 || !model.alphabet().indices(*decoded)) continue;
    means.push_back(model.score(std::u32string_view(*decoded)) / static_cast<double>(length));
  }
  if (means.empty()) return -std::numeric_limits<double>::infinity();
  std::sort(means.begin(), means.end());
  // nearest-rank percentile
  const auto rank = static_cast<std::size_t>(std::ceil(percentile * static_cast<double>(means.size())));
  return means[rank == 0 ? 0 : rank - 1];
}

std::size_t neighborhood_size(std::string_view word, const Lexicon& lexicon, const Alphabet& alphabet) {
  if (lexicon.words().empty()) return 0;
  auto variant = utf8::decode(latin_lower(word));
  std::size_t n = 0;
  for (std::size_t i = 0; i < variant.size(); ++i) {
    const char32_t original = variant[i];
    for (char32_t c : alphabet.letters()) {
      if (c == original) continue;
      variant[i] = c;
      if (lexicon.words().count(utf8::encode(variant))) ++n;
    }
    variant[i] = original;
  }
  return n;
}

}  // namespace nonword
