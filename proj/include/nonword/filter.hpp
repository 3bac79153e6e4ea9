#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "nonword/corpus.hpp"
#include "nonword/generator.hpp"
#include "nonword/lm.hpp"

namespace nonword {

// Audit trail of one or more filtering passes.
// input_count == output_count + removed_lexicon + removed_exclusion + removed_low_probability
struct FilterReport {
  std::uint64_t input_count = 0;
  std::uint64_t removed_lexicon = 0;
  std::uint64_t removed_exclusion = 0;
  std::uint64_t removed_low_probability = 0;
  std::uint64_t output_count = 0;
  // Subset of removed_low_probability that could not be scored at all.
  std::uint64_t unscorable = 0;

  bool balanced() const {
    return input_count == output_count + removed_lexicon + removed_exclusion + removed_low_probability;
  }
  // Chains a later pass: its input is this pass's output.
  FilterReport then(const FilterReport& next) const;

  // `key=value` lines, one per field.
  std::string to_key_values() const;
};

// Streaming membership filter; call keep() once per candidate.
class LexiconFilter {
 public:
  explicit LexiconFilter(const Lexicon& lexicon) : lexicon_(&lexicon) {}
  bool keep(std::string_view text);
  const FilterReport& report() const { return report_; }

 private:
  const Lexicon* lexicon_;
  FilterReport report_;
};

// Streaming per-character log-likelihood threshold.
class LowProbabilityFilter {
 public:
  LowProbabilityFilter(const PositionalNgramModel& model, double per_char_threshold)
      : model_(&model), threshold_(per_char_threshold) {}
  bool keep(std::string_view text);
  const FilterReport& report() const { return report_; }

 private:
  const PositionalNgramModel* model_;
  double threshold_;
  FilterReport report_;
};

struct FilterResult {
  std::vector<Candidate> candidates;
  FilterReport report;
};

FilterResult filter_lexicon(std::vector<Candidate> candidates, const Lexicon& lexicon);
FilterResult filter_low_probability(std::vector<Candidate> candidates, const PositionalNgramModel& model,
                                    double per_char_threshold);

// Percentile (default 5th) of mean per-character scores of lexicon words of
// the given length that the model can score. -infinity when there are none,
// which makes the low-probability filter a no-op.
double default_threshold(const PositionalNgramModel& model, const Lexicon& lexicon, std::size_t length,
                         double percentile = 0.05);

// Coltheart's N: lexicon word forms reachable from `word` by substituting
// exactly one character with a different alphabet character.
std::size_t neighborhood_size(std::string_view word, const Lexicon& lexicon, const Alphabet& alphabet);

}  // namespace nonword
