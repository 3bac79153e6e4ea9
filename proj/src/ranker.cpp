#include "nonword/ranker.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "nonword/errors.hpp"

namespace nonword {

std::vector<std::string> RankedList::texts() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& c : items) out.push_back(c.text);
  return out;
}

RankedList rank(std::vector<Candidate> candidates, const PositionalNgramModel& model, std::string model_id) {
  std::vector<std::string> offenders;
  std::unordered_set<std::string> seen;
  std::vector<std::u32string> decoded(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto& c = candidates[i];
    if (!seen.insert(c.text).second) {
      offenders.push_back(c.text);
      continue;
    }
    auto text = utf8::try_decode(c.text);
    if (!text || text->size() < 2 || !model.alphabet().indices(*text)) {
      offenders.push_back(c.text);
      continue;
    }
    c.scores[model_id] = model.score(std::u32string_view(*text));
    decoded[i] = std::move(*text);
  }
  if (!offenders.empty()) {
    std::string what = "cannot rank " + std::to_string(offenders.size()) + " candidate(s) under '" + model_id + "':";
    for (std::size_t i = 0; i < offenders.size() && i < 10; ++i) what += " '" + offenders[i] + "'";
    throw RankingError(what, std::move(offenders));
  }

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  const Alphabet& alphabet = model.alphabet();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = candidates[a].scores.at(model_id);
    const double sb = candidates[b].scores.at(model_id);
    if (sa != sb) return sa > sb;
    return alphabet.less(decoded[a], decoded[b]);
  });

  RankedList out;
  out.model_id = std::move(model_id);
  out.items.reserve(candidates.size());
  for (auto i : order) out.items.push_back(std::move(candidates[i]));
  return out;
}

RankedList rerank(const RankedList& ranked, const PositionalNgramModel& other_model, std::string model_id) {
  return rank(ranked.items, other_model, std::move(model_id));
}

std::set<std::string> top_k_intersection(const RankedList& a, const RankedList& b, std::size_t k) {
  if (k > a.size() || k > b.size()) {
    throw RangeError("k=" + std::to_string(k) + " exceeds list sizes " + std::to_string(a.size()) + "/" +
                     std::to_string(b.size()));
  }
  std::unordered_set<std::string> prefix;
  for (std::size_t i = 0; i < k; ++i) prefix.insert(a.items[i].text);
  std::set<std::string> out;
  for (std::size_t i = 0; i < k; ++i) {
    if (prefix.count(b.items[i].text)) out.insert(b.items[i].text);
  }
  return out;
}

std::vector<RankedList> select_disjoint_top(std::span<const RankedList> rankings, std::size_t k) {
  std::unordered_set<std::string> claimed;
  std::vector<RankedList> out;
  for (const auto& ranking : rankings) {
    RankedList picked;
    picked.model_id = ranking.model_id;
    for (const auto& item : ranking.items) {
      if (picked.items.size() == k) break;
      if (claimed.count(item.text)) continue;
      picked.items.push_back(item);
    }
    if (picked.items.size() < k) {
      throw SelectionError("ranking '" + ranking.model_id + "' has only " + std::to_string(picked.items.size()) +
                           " unclaimed items, need " + std::to_string(k));
    }
    for (const auto& item : picked.items) claimed.insert(item.text);
    out.push_back(std::move(picked));
  }
  return out;
}

std::vector<std::string> sample_without_replacement(std::vector<std::string> items, std::size_t n, Rng& rng) {
  if (n > items.size()) {
    throw RangeError("cannot draw " + std::to_string(n) + " items from " + std::to_string(items.size()));
  }
  // partial Fisher-Yates from the front
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.below(items.size() - i);
    std::swap(items[i], items[j]);
  }
  items.resize(n);
  return items;
}

std::string_view design_name(StudyDesign design) {
  return design == StudyDesign::Perception ? "perception" : "lexical_decision";
}

std::optional<StudyDesign> parse_design(std::string_view name) {
  if (name == "perception") return StudyDesign::Perception;
  if (name == "lexical_decision" || name == "decision") return StudyDesign::LexicalDecision;
  return std::nullopt;
}

bool StudyList::contains(std::string_view text) const {
  return std::any_of(items.begin(), items.end(), [&](const StudyItem& item) { return item.text == text; });
}

nlohmann::json to_json(const StudyList& list) {
  nlohmann::json j;
  j["design"] = design_name(list.design);
  j["seed"] = list.seed ? nlohmann::json(*list.seed) : nlohmann::json(nullptr);
  if (list.design == StudyDesign::LexicalDecision) j["block_size"] = list.block_size;
  auto& items = j["items"] = nlohmann::json::array();
  for (const auto& item : list.items) {
    nlohmann::json row{{"text", item.text}, {"group", item.group}};
    if (item.block) row["block"] = *item.block;
    items.push_back(std::move(row));
  }
  return j;
}

StudyList study_list_from_json(const nlohmann::json& j) {
  StudyList list;
  try {
    const auto design = parse_design(j.at("design").get<std::string>());
    if (!design) throw InputFormatError("unknown study design '" + j.at("design").get<std::string>() + "'");
    list.design = *design;
    if (j.contains("seed") && !j.at("seed").is_null()) list.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("block_size")) list.block_size = j.at("block_size").get<std::size_t>();
    for (const auto& row : j.at("items")) {
      StudyItem item{row.at("text").get<std::string>(), row.at("group").get<std::string>(), std::nullopt};
      if (row.contains("block")) item.block = row.at("block").get<std::size_t>();
      list.items.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputFormatError(std::string("study list JSON: ") + e.what());
  }
  return list;
}

StudyList build_perception_list(const std::vector<std::string>& g1, const std::vector<std::string>& g2,
                                const std::vector<std::string>& g3) {
  if (g1.size() != g2.size() || g2.size() != g3.size()) {
    throw ConstructionError("perception groups must have equal lengths (" + std::to_string(g1.size()) + "/" +
                            std::to_string(g2.size()) + "/" + std::to_string(g3.size()) + ")");
  }
  StudyList list;
  list.design = StudyDesign::Perception;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    list.items.push_back({g1[i], "g1", std::nullopt});
    list.items.push_back({g2[i], "g2", std::nullopt});
    list.items.push_back({g3[i], "g3", std::nullopt});
  }
  return list;
}

StudyList build_decision_blocks(const std::vector<TaggedList>& per_model_lists,
                                const std::vector<std::string>& fillers, Rng& rng) {
  if (per_model_lists.empty()) throw ConstructionError("lexical decision blocks need at least one non-word list");
  const std::size_t k = fillers.size();
  for (const auto& list : per_model_lists) {
    if (list.texts.size() != k) {
      throw ConstructionError("list '" + list.tag + "' has " + std::to_string(list.texts.size()) +
                              " items, fillers have " + std::to_string(k));
    }
    if (list.tag == kFillerTag) throw ConstructionError("tag FI is reserved for fillers");
  }
  StudyList out;
  out.design = StudyDesign::LexicalDecision;
  out.block_size = per_model_lists.size() + 1;
  for (std::size_t b = 0; b < k; ++b) {
    std::vector<StudyItem> block;
    for (const auto& list : per_model_lists) block.push_back({list.texts[b], list.tag, b});
    block.push_back({fillers[b], std::string(kFillerTag), b});
    for (std::size_t i = block.size() - 1; i > 0; --i) std::swap(block[i], block[rng.below(i + 1)]);
    for (auto& item : block) out.items.push_back(std::move(item));
  }
  return out;
}

PerceptionGroups build_perception_groups(const RankedList& target, const RankedList& other, std::size_t k,
                                         std::size_t depth, Rng& rng) {
  if (k > target.size() || k > other.size()) throw RangeError("k exceeds ranking size");
  PerceptionGroups groups;
  for (std::size_t i = 0; i < k; ++i) groups.g1.push_back(target.items[i].text);
  // The other model's top k, skipping items the target already contributed.
  std::unordered_set<std::string> used(groups.g1.begin(), groups.g1.end());
  for (const auto& item : other.items) {
    if (groups.g2.size() == k) break;
    if (used.insert(item.text).second) groups.g2.push_back(item.text);
  }
  if (groups.g2.size() < k) throw SelectionError("not enough distinct items for the second group");

  const auto common = top_k_intersection(target, other, depth);
  groups.intersection_size = common.size();
  std::vector<std::string> pool;
  for (const auto& item : target.items) {
    if (common.count(item.text) && !used.count(item.text)) pool.push_back(item.text);
  }
  if (pool.size() < k) {
    throw SelectionError("intersection of the top " + std::to_string(depth) + " holds only " +
                         std::to_string(pool.size()) + " unused items, need " + std::to_string(k));
  }
  groups.g3 = sample_without_replacement(std::move(pool), k, rng);
  return groups;
}

}  // namespace nonword
