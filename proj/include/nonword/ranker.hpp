#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "nonword/generator.hpp"
#include "nonword/lm.hpp"
#include "nonword/rng.hpp"

namespace nonword {

// Candidates ordered by one model's score, best first, ties in alphabet
// order of the text. Texts are distinct.
struct RankedList {
  std::string model_id;
  std::vector<Candidate> items;

  double score_at(std::size_t i) const { return items[i].scores.at(model_id); }
  std::vector<std::string> texts() const;
  std::size_t size() const { return items.size(); }
};

// Throws RankingError listing every candidate the model cannot score, or
// any duplicated text.
RankedList rank(std::vector<Candidate> candidates, const PositionalNgramModel& model, std::string model_id);
RankedList rerank(const RankedList& ranked, const PositionalNgramModel& other_model, std::string model_id);

// Texts found in the first k items of both lists.
std::set<std::string> top_k_intersection(const RankedList& a, const RankedList& b, std::size_t k);

// Walks the rankings in order; each takes its best k items not already taken
// by an earlier ranking. Throws SelectionError when a ranking runs out.
std::vector<RankedList> select_disjoint_top(std::span<const RankedList> rankings, std::size_t k);

// n items drawn without replacement, in draw order.
std::vector<std::string> sample_without_replacement(std::vector<std::string> items, std::size_t n, Rng& rng);

enum class StudyDesign { Perception, LexicalDecision };

std::string_view design_name(StudyDesign design);
std::optional<StudyDesign> parse_design(std::string_view name);

struct StudyItem {
  std::string text;
  std::string group;
  std::optional<std::size_t> block;  // lexical decision only
};

struct StudyList {
  StudyDesign design = StudyDesign::Perception;
  std::optional<std::uint64_t> seed;
  std::vector<StudyItem> items;
  std::size_t block_size = 0;  // lexical decision only

  bool contains(std::string_view text) const;
};

nlohmann::json to_json(const StudyList& list);
StudyList study_list_from_json(const nlohmann::json& j);

struct TaggedList {
  std::string tag;
  std::vector<std::string> texts;
};

// Strict round robin g1, g2, g3, g1, ... Throws ConstructionError on unequal
// lengths.
StudyList build_perception_list(const std::vector<std::string>& g1, const std::vector<std::string>& g2,
                                const std::vector<std::string>& g3);

inline constexpr std::string_view kFillerTag = "FI";

// Block i holds item i of every source list plus filler i, shuffled with
// `rng`. Throws ConstructionError on unequal lengths or an empty source set.
StudyList build_decision_blocks(const std::vector<TaggedList>& per_model_lists,
                                const std::vector<std::string>& fillers, Rng& rng);

// The three groups of the perception design: the target model's top k, the
// other model's top k, and k items drawn at random from the intersection of
// both top-`depth` prefixes (items already in the first two groups are not
// drawn again).
struct PerceptionGroups {
  std::vector<std::string> g1, g2, g3;
  std::size_t intersection_size = 0;
};

PerceptionGroups build_perception_groups(const RankedList& target, const RankedList& other, std::size_t k,
                                         std::size_t depth, Rng& rng);

}  // namespace nonword
