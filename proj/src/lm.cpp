#include "nonword/lm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <tuple>

#include "nonword/errors.hpp"

namespace nonword {

const double PositionalNgramModel::kFloorLogProb = std::log(1e-7);

namespace {

constexpr std::string_view kMagic = "posgram";
constexpr std::string_view kVersion = "v1";

Zone key_zone(std::uint64_t key) { return static_cast<Zone>(key & 0x3); }
std::size_t key_length(std::uint64_t key) { return (key >> 2) & 0xF; }
std::uint8_t key_char(std::uint64_t key, std::size_t j) {
  return static_cast<std::uint8_t>((key >> (8 + 8 * j)) & 0xFF);
}

}  // namespace

Zone zone_of(std::size_t index, std::size_t length) {
  if (index + 1 == length) return Zone::Final;
  return index <= 2 ? Zone::Initial : Zone::Medial;
}

std::string_view zone_name(Zone zone) {
  switch (zone) {
    case Zone::Initial:
      return "INITIAL";
    case Zone::Medial:
      return "MEDIAL";
    case Zone::Final:
      return "FINAL";
  }
  return "?";
}

std::optional<Zone> parse_zone(std::string_view name) {
  if (name == "INITIAL") return Zone::Initial;
  if (name == "MEDIAL") return Zone::Medial;
  if (name == "FINAL") return Zone::Final;
  return std::nullopt;
}

std::optional<std::size_t> choose_continuation(std::size_t k, Rng& rng) {
  if (k == 0) return std::nullopt;
  for (std::size_t i = 0; i < k; ++i) {
    if (rng.uniform() >= 0.5) return i;
  }
  return k - 1;
}

std::uint64_t PositionalNgramModel::ContextStats::count_of(std::uint8_t index) const {
  for (const auto& [c, n] : counts) {
    if (c == index) return n;
  }
  return 0;
}

PositionalNgramModel::Key PositionalNgramModel::make_key(Zone zone, const std::uint8_t* context,
                                                        std::size_t length) {
  Key key = static_cast<Key>(zone) | (static_cast<Key>(length) << 2);
  for (std::size_t j = 0; j < length; ++j) key |= static_cast<Key>(context[j]) << (8 + 8 * j);
  return key;
}

void PositionalNgramModel::add(Zone zone, const std::uint8_t* context, std::size_t length, std::uint8_t c,
                               std::uint64_t n) {
  auto& stats = exact_[make_key(zone, context, length)];
  for (auto& [ch, count] : stats.counts) {
    if (ch == c) {
      count += n;
      return;
    }
  }
  stats.counts.emplace_back(c, n);
}

void PositionalNgramModel::finalize() {
  suffix_.clear();
  for (auto& [key, stats] : exact_) {
    std::sort(stats.counts.begin(), stats.counts.end());
    stats.total = 0;
    for (const auto& [_, n] : stats.counts) stats.total += n;

    // ordered continuations: count descending, alphabet index ascending
    auto by_rank = stats.counts;
    std::stable_sort(by_rank.begin(), by_rank.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    stats.ordered.clear();
    for (const auto& [c, n] : by_rank) {
      stats.ordered.push_back({alphabet_.at(c), std::log(static_cast<double>(n) / static_cast<double>(stats.total))});
    }

    const Zone zone = key_zone(key);
    const std::size_t len = key_length(key);
    std::uint8_t context[kMaxOrder];
    for (std::size_t j = 0; j < len; ++j) context[j] = key_char(key, j);
    for (std::size_t drop = 0; drop <= len; ++drop) {
      auto& agg = suffix_[make_key(zone, context + drop, len - drop)];
      for (const auto& [c, n] : stats.counts) {
        auto it = std::find_if(agg.counts.begin(), agg.counts.end(), [c = c](const auto& e) { return e.first == c; });
        if (it == agg.counts.end()) {
          agg.counts.emplace_back(c, n);
        } else {
          it->second += n;
        }
        agg.total += n;
      }
    }
  }
  for (auto& [_, agg] : suffix_) std::sort(agg.counts.begin(), agg.counts.end());
}

PositionalNgramModel PositionalNgramModel::train(const WordFrequencyTable& table, int order) {
  if (order < 2 || order > kMaxOrder) {
    throw TrainingError("model order must be between 2 and " + std::to_string(kMaxOrder));
  }
  if (table.empty()) throw TrainingError("cannot train on an empty word table");
  for (char32_t c : table.alphabet().letters()) {
    if (c == U'\t' || c == U'\n' || c == U'\r' || c == U' ') {
      throw TrainingError("model alphabets cannot contain whitespace");
    }
  }
  PositionalNgramModel model(table.alphabet(), order);
  const std::size_t max_context = static_cast<std::size_t>(order - 1);
  for (const auto& [word, n] : table.entries()) {
    const auto idx = *model.alphabet_.indices(utf8::decode(word));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const std::size_t len = std::min(i, max_context);
      model.add(zone_of(i, idx.size()), idx.data() + i - len, len, idx[i], n);
    }
  }
  model.finalize();
  return model;
}

const PositionalNgramModel::ContextStats* PositionalNgramModel::find_exact(Zone zone,
                                                                           std::u32string_view context) const {
  if (context.size() >= static_cast<std::size_t>(order_)) return nullptr;
  auto idx = alphabet_.indices(context);
  if (!idx) return nullptr;
  auto it = exact_.find(make_key(zone, idx->data(), idx->size()));
  return it == exact_.end() ? nullptr : &it->second;
}

std::uint64_t PositionalNgramModel::count(Zone zone, std::u32string_view context, char32_t c) const {
  const auto* stats = find_exact(zone, context);
  const auto i = alphabet_.index_of(c);
  if (!stats || !i) return 0;
  return stats->count_of(*i);
}

std::uint64_t PositionalNgramModel::total(Zone zone, std::u32string_view context) const {
  const auto* stats = find_exact(zone, context);
  return stats ? stats->total : 0;
}

std::span<const Continuation> PositionalNgramModel::continuations(std::u32string_view stub, Zone zone) const {
  const auto* stats = find_exact(zone, stub);
  if (!stats) return {};
  return stats->ordered;
}

std::optional<char32_t> PositionalNgramModel::next(std::u32string_view stub, Zone zone, Rng& rng) const {
  const auto options = continuations(stub, zone);
  const auto rank = choose_continuation(options.size(), rng);
  if (!rank) return std::nullopt;
  return options[*rank].character;
}

double PositionalNgramModel::score(std::u32string_view word) const {
  if (word.size() < 2) throw ScoringError("cannot score '" + utf8::encode(word) + "': shorter than 2 characters");
  const auto idx = alphabet_.indices(word);
  if (!idx) throw ScoringError("cannot score '" + utf8::encode(word) + "': character outside the model alphabet");
  const std::size_t max_context = static_cast<std::size_t>(order_ - 1);
  double total = 0.0;
  for (std::size_t i = 0; i < idx->size(); ++i) {
    const Zone zone = zone_of(i, idx->size());
    const std::uint8_t c = (*idx)[i];
    double lp = kFloorLogProb;
    for (std::size_t len = std::min(i, max_context);; --len) {
      auto it = suffix_.find(make_key(zone, idx->data() + i - len, len));
      if (it != suffix_.end()) {
        const auto n = it->second.count_of(c);
        if (n > 0) lp = std::log(static_cast<double>(n) / static_cast<double>(it->second.total));
        break;
      }
      if (len == 0) break;
    }
    total += lp;
  }
  return total;
}

double PositionalNgramModel::score(std::string_view utf8_word) const {
  auto decoded = utf8::try_decode(utf8_word);
  if (!decoded) throw ScoringError("cannot score: invalid UTF-8");
  return score(std::u32string_view(*decoded));
}

double PositionalNgramModel::mean_score(std::string_view utf8_word) const {
  auto decoded = utf8::try_decode(utf8_word);
  if (!decoded) throw ScoringError("cannot score: invalid UTF-8");
  return score(std::u32string_view(*decoded)) / static_cast<double>(decoded->size());
}

std::vector<PositionalNgramModel::Entry> PositionalNgramModel::entries() const {
  struct Row {
    Zone zone;
    std::vector<std::uint8_t> context;
    std::uint8_t c;
    std::uint64_t n;
  };
  std::vector<Row> rows;
  for (const auto& [key, stats] : exact_) {
    std::vector<std::uint8_t> context(key_length(key));
    for (std::size_t j = 0; j < context.size(); ++j) context[j] = key_char(key, j);
    for (const auto& [c, n] : stats.counts) rows.push_back({key_zone(key), context, c, n});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.zone, a.context, a.c) < std::tie(b.zone, b.context, b.c);
  });
  std::vector<Entry> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    std::u32string context;
    for (auto i : row.context) context.push_back(alphabet_.at(i));
    out.push_back({row.zone, std::move(context), alphabet_.at(row.c), row.n});
  }
  return out;
}

void PositionalNgramModel::serialize(std::ostream& out) const {
  out << kMagic << ' ' << kVersion << " order=" << order_ << " alphabet=" << alphabet_.to_utf8() << '\n';
  for (const auto& e : entries()) {
    out << zone_name(e.zone) << '\t' << utf8::encode(e.context) << '\t' << utf8::encode(e.character) << '\t'
        << e.count << '\n';
  }
}

PositionalNgramModel PositionalNgramModel::deserialize(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  std::size_t offset = 0;
  if (!std::getline(in, line)) throw FormatError("empty model stream", 1, 0);
  const std::string header = line;
  offset += line.size() + 1;

  const std::string prefix = std::string(kMagic) + ' ';
  if (header.rfind(prefix, 0) != 0) throw FormatError("not a posgram model file", 1, 0);
  const std::string version_prefix = prefix + std::string(kVersion) + ' ';
  if (header.rfind(version_prefix, 0) != 0) {
    throw FormatError("unsupported model version (expected " + std::string(kVersion) + ")", 1, prefix.size());
  }
  std::size_t pos = version_prefix.size();
  constexpr std::string_view order_key = "order=";
  if (header.compare(pos, order_key.size(), order_key) != 0) throw FormatError("expected order=", 1, pos);
  pos += order_key.size();
  const auto space = header.find(' ', pos);
  if (space == std::string::npos) throw FormatError("expected alphabet= after order", 1, pos);
  int order = 0;
  {
    const std::string digits = header.substr(pos, space - pos);
    if (digits.empty() || digits.size() > 2 || !std::all_of(digits.begin(), digits.end(), ::isdigit)) {
      throw FormatError("bad model order", 1, pos);
    }
    order = std::stoi(digits);
    if (order < 2 || order > kMaxOrder) throw FormatError("model order out of range", 1, pos);
  }
  pos = space + 1;
  constexpr std::string_view alphabet_key = "alphabet=";
  if (header.compare(pos, alphabet_key.size(), alphabet_key) != 0) throw FormatError("expected alphabet=", 1, pos);
  pos += alphabet_key.size();
  auto letters = utf8::try_decode(std::string_view(header).substr(pos));
  if (!letters || letters->empty()) throw FormatError("bad alphabet", 1, pos);
  std::optional<Alphabet> alphabet;
  try {
    alphabet.emplace(*letters);
  } catch (const RangeError& e) {
    throw FormatError(e.what(), 1, pos);
  }

  PositionalNgramModel model(*alphabet, order);
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    if (line.empty()) continue;
    std::string_view rest(line);
    std::string_view fields[4];
    for (int f = 0; f < 3; ++f) {
      const auto tab = rest.find('\t');
      if (tab == std::string_view::npos) throw FormatError("expected 4 tab-separated fields", line_no, line_offset);
      fields[f] = rest.substr(0, tab);
      rest.remove_prefix(tab + 1);
    }
    fields[3] = rest;
    const auto zone = parse_zone(fields[0]);
    if (!zone) throw FormatError("unknown zone '" + std::string(fields[0]) + "'", line_no, line_offset);
    auto context = utf8::try_decode(fields[1]);
    auto character = utf8::try_decode(fields[2]);
    const std::size_t ctx_offset = line_offset + fields[0].size() + 1;
    if (!context) throw FormatError("invalid UTF-8 in context", line_no, ctx_offset);
    if (context->size() >= static_cast<std::size_t>(order)) {
      throw FormatError("context longer than order-1", line_no, ctx_offset);
    }
    auto context_idx = alphabet->indices(*context);
    if (!context_idx) throw FormatError("context outside alphabet", line_no, ctx_offset);
    const std::size_t char_offset = ctx_offset + fields[1].size() + 1;
    if (!character || character->size() != 1) throw FormatError("expected a single character", line_no, char_offset);
    const auto char_idx = alphabet->index_of(character->front());
    if (!char_idx) throw FormatError("character outside alphabet", line_no, char_offset);
    const std::size_t count_offset = char_offset + fields[2].size() + 1;
    if (fields[3].empty() || fields[3].size() > 19 ||
        !std::all_of(fields[3].begin(), fields[3].end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw FormatError("bad count", line_no, count_offset);
    }
    const std::uint64_t n = std::stoull(std::string(fields[3]));
    if (n == 0) throw FormatError("count must be positive", line_no, count_offset);
    model.add(*zone, context_idx->data(), context_idx->size(), *char_idx, n);
  }
  if (in.bad()) throw FormatError("read error", line_no, offset);
  if (model.exact_.empty()) throw FormatError("model has no entries", line_no, offset);
  model.finalize();
  return model;
}

}  // namespace nonword
