#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "nonword/errors.hpp"
#include "nonword/lm.hpp"
#include "support.hpp"

using namespace nonword;

namespace {

PositionalNgramModel train_on(std::initializer_list<std::pair<const char*, std::uint64_t>> words, int order = 4,
                              Alphabet alphabet = Alphabet::swedish()) {
  WordFrequencyTable t(std::move(alphabet));
  for (const auto& [w, n] : words) t.add(w, n);
  return PositionalNgramModel::train(t, order);
}

WordFrequencyTable random_table(Rng& rng, const Alphabet& alphabet, std::size_t types) {
  WordFrequencyTable t(alphabet);
  for (std::size_t i = 0; i < types; ++i) {
    t.add(testing::random_word(rng, alphabet, 2 + rng.below(8)), 1 + rng.below(20));
  }
  return t;
}

// Backoff score computed straight from the word table: for each position,
// count (zone, context suffix, char) occurrences over all training positions,
// taking the longest suffix that occurs at all.
double oracle_score(const WordFrequencyTable& table, int order, const std::u32string& word) {
  std::vector<std::pair<std::u32string, std::uint64_t>> words;
  for (const auto& [w, n] : table.entries()) words.emplace_back(utf8::decode(w), n);
  double total = 0.0;
  for (std::size_t i = 0; i < word.size(); ++i) {
    const Zone z = zone_of(i, word.size());
    const std::size_t full = std::min<std::size_t>(i, order - 1);
    double lp = std::log(1e-7);
    for (std::size_t len = full + 1; len-- > 0;) {
      const std::u32string suffix = word.substr(i - len, len);
      std::uint64_t hits = 0, seen = 0;
      for (const auto& [w, n] : words) {
        for (std::size_t j = 0; j < w.size(); ++j) {
          if (zone_of(j, w.size()) != z) continue;
          if (std::min<std::size_t>(j, order - 1) < len) continue;
          if (w.compare(j - len, len, suffix) != 0) continue;
          seen += n;
          if (w[j] == word[i]) hits += n;
        }
      }
      if (seen > 0) {
        if (hits > 0) lp = std::log(static_cast<double>(hits) / static_cast<double>(seen));
        break;
      }
    }
    total += lp;
  }
  return total;
}

std::string serialized(const PositionalNgramModel& m) {
  std::ostringstream out;
  m.serialize(out);
  return out.str();
}

}  // namespace

TEST_CASE("zone assignment") {
  CHECK(zone_of(0, 1) == Zone::Final);
  CHECK(zone_of(2, 3) == Zone::Final);
  CHECK(zone_of(2, 6) == Zone::Initial);
  CHECK(zone_of(3, 6) == Zone::Medial);
  CHECK(zone_of(0, 6) == Zone::Initial);
  CHECK(zone_of(5, 6) == Zone::Final);
  CHECK(zone_of(9, 11) == Zone::Medial);
  for (auto z : {Zone::Initial, Zone::Medial, Zone::Final}) CHECK(parse_zone(zone_name(z)) == z);
  CHECK_FALSE(parse_zone("initial").has_value());
}

TEST_CASE("training counts are hand-countable") {
  const auto ab = train_on({{"ab", 1}});
  CHECK(ab.count(Zone::Initial, U"", U'a') == 1);
  CHECK(ab.count(Zone::Final, U"a", U'b') == 1);
  CHECK(ab.total(Zone::Initial, U"") == 1);
  CHECK(ab.context_count() == 2);

  const auto abc = train_on({{"abc", 2}});
  CHECK(abc.count(Zone::Final, U"ab", U'c') == 2);
  CHECK(abc.count(Zone::Initial, U"a", U'b') == 2);

  // contexts never exceed order-1 characters
  const auto long_word = train_on({{"abcdefgh", 1}});
  CHECK(long_word.count(Zone::Medial, U"bcd", U'e') == 1);
  CHECK(long_word.count(Zone::Final, U"efg", U'h') == 1);
  CHECK(long_word.total(Zone::Medial, U"abcd") == 0);

  WordFrequencyTable empty(Alphabet::swedish());
  CHECK_THROWS_AS(PositionalNgramModel::train(empty), TrainingError);
  CHECK_THROWS_AS(train_on({{"ab", 1}}, 1), TrainingError);
}

TEST_CASE("continuations are ordered by likelihood") {
  const auto m = train_on({{"ab", 1}, {"ac", 3}});
  const auto c = m.continuations(U"a", Zone::Final);
  REQUIRE(c.size() == 2);
  CHECK(c[0].character == U'c');
  CHECK(c[0].log_likelihood == doctest::Approx(std::log(0.75)).epsilon(1e-15));
  CHECK(c[1].character == U'b');
  CHECK(c[1].log_likelihood == doctest::Approx(std::log(0.25)).epsilon(1e-15));
  CHECK(m.continuations(U"zz", Zone::Final).empty());
  CHECK(m.continuations(U"a", Zone::Medial).empty());

  // equal counts fall back to alphabet order
  const auto tie = train_on({{"aö", 1}, {"ab", 1}, {"aå", 1}});
  const auto t = tie.continuations(U"a", Zone::Final);
  REQUIRE(t.size() == 3);
  CHECK(t[0].character == U'b');
  CHECK(t[1].character == U'å');
  CHECK(t[2].character == U'ö');
}

TEST_CASE("every observed context is a normalized distribution") {
  Rng rng(11);
  std::vector<PositionalNgramModel> models;
  for (int i = 0; i < 5; ++i) models.push_back(PositionalNgramModel::train(random_table(rng, Alphabet::swedish(), 2000)));
  models.push_back(testing::desk_model("sv"));

  for (const auto& m : models) {
    // group entries by (zone, context) and check each against the model's lookups
    const auto entries = m.entries();
    std::size_t contexts = 0;
    for (std::size_t i = 0; i < entries.size();) {
      std::size_t j = i;
      std::uint64_t sum = 0;
      while (j < entries.size() && entries[j].zone == entries[i].zone && entries[j].context == entries[i].context) {
        REQUIRE(m.alphabet().contains(entries[j].character));
        REQUIRE(entries[j].count >= 1);
        sum += entries[j].count;
        ++j;
      }
      REQUIRE(entries[i].context.size() < static_cast<std::size_t>(m.order()));
      REQUIRE(m.total(entries[i].zone, entries[i].context) == sum);
      const auto c = m.continuations(entries[i].context, entries[i].zone);
      REQUIRE(c.size() == j - i);
      double p = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k) {
        REQUIRE(c[k].log_likelihood <= 0.0);
        if (k > 0) REQUIRE(c[k - 1].log_likelihood >= c[k].log_likelihood);
        p += std::exp(c[k].log_likelihood);
      }
      REQUIRE(std::abs(p - 1.0) <= 1e-12);
      ++contexts;
      i = j;
    }
    CHECK(contexts == m.context_count());
  }
}

TEST_CASE("next follows the halving walk") {
  const auto single = train_on({{"ab", 1}});
  Rng rng(1);
  for (int i = 0; i < 100; ++i) REQUIRE(single.next(U"a", Zone::Final, rng) == U'b');
  CHECK_FALSE(single.next(U"q", Zone::Final, rng).has_value());
  CHECK_FALSE(choose_continuation(0, rng).has_value());

  // k = 5 over 10^6 draws: rank i has probability 0.5^(i+1), the last 0.5^4
  constexpr int kDraws = 1000000;
  std::array<int, 5> hits{};
  Rng draws(20240101);
  for (int i = 0; i < kDraws; ++i) ++hits[*choose_continuation(5, draws)];
  const std::array<double, 5> expected = {0.5, 0.25, 0.125, 0.0625, 0.0625};
  for (int r = 0; r < 5; ++r) {
    const double p = expected[r];
    const double sigma = std::sqrt(p * (1 - p) / kDraws);
    CHECK(std::abs(hits[r] / double(kDraws) - p) <= 3 * sigma);
  }

  Rng a(77), b(77);
  const auto& sv = testing::desk_model("sv");
  for (int i = 0; i < 1000; ++i) REQUIRE(sv.next(U"ka", Zone::Initial, a) == sv.next(U"ka", Zone::Initial, b));
}

TEST_CASE("score by hand") {
  CHECK(train_on({{"ab", 1}}).score("ab") == 0.0);
  CHECK(train_on({{"ab", 1}, {"ac", 3}}).score("ac") == doctest::Approx(std::log(0.75)).epsilon(1e-15));
  const auto m = train_on({{"ab", 1}});
  // unseen everywhere: the floor per character
  CHECK(m.score("öö") == doctest::Approx(2 * PositionalNgramModel::kFloorLogProb));
  // final "a" was only ever followed by "b": "c" gets the floor, no backoff to the empty context
  CHECK(train_on({{"ab", 1}, {"bc", 1}}).score("ac") ==
        doctest::Approx(std::log(0.5) + PositionalNgramModel::kFloorLogProb));
  CHECK(train_on({{"ab", 1}, {"bc", 1}}).score("xc") ==
        doctest::Approx(PositionalNgramModel::kFloorLogProb + std::log(0.5)));
  CHECK_THROWS_AS(m.score("aü"), ScoringError);
  CHECK_THROWS_AS(m.score("a"), ScoringError);
}

TEST_CASE("score matches a brute-force backoff oracle") {
  Rng rng(5);
  const Alphabet small = Alphabet::from_utf8("abcde");
  for (int trial = 0; trial < 4; ++trial) {
    const auto table = random_table(rng, small, 60);
    for (int order : {2, 3, 4}) {
      const auto m = PositionalNgramModel::train(table, order);
      for (int i = 0; i < 60; ++i) {
        const auto w = utf8::decode(testing::random_word(rng, small, 2 + rng.below(8)));
        const double s = m.score(std::u32string_view(w));
        REQUIRE(s <= 0.0);
        REQUIRE(s == doctest::Approx(oracle_score(table, order, w)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("junk scores below the most frequent Swedish words") {
  const auto& sv = testing::desk_model("sv");
  std::ifstream in(testing::data_dir() / "wordlists" / "sv.tsv");
  std::vector<std::pair<std::uint64_t, std::string>> freq;
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    const auto w = line.substr(0, tab);
    if (utf8::decode(w).size() >= 2 && sv.alphabet().indices(utf8::decode(w))) {
      freq.emplace_back(std::stoull(line.substr(tab + 1)), w);
    }
  }
  std::sort(freq.rbegin(), freq.rend());
  REQUIRE(freq.size() > 100);
  const double junk = sv.score("xxxxx");
  for (int i = 0; i < 100; ++i) CHECK(junk < sv.score(freq[i].second));
  CHECK(sv.score("äåååå") < sv.score("huset"));
}

TEST_CASE("serialization round trip") {
  const auto& sv = testing::desk_model("sv");
  const auto text = serialized(sv);
  std::istringstream in(text);
  const auto back = PositionalNgramModel::deserialize(in);
  CHECK(serialized(back) == text);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto w = testing::random_word(rng, sv.alphabet(), 2 + rng.below(10));
    REQUIRE(back.score(w) == sv.score(w));
  }
  for (const auto& stub : {U"", U"k", U"ka", U"kat"}) {
    const auto a = sv.continuations(stub, Zone::Initial);
    const auto b = back.continuations(stub, Zone::Initial);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      REQUIRE(a[k].character == b[k].character);
      REQUIRE(a[k].log_likelihood == b[k].log_likelihood);
    }
  }

  std::istringstream tiny("posgram v1 order=4 alphabet=ab\nINITIAL\t\ta\t3\nINITIAL\t\tb\t1\n");
  const auto t = PositionalNgramModel::deserialize(tiny);
  CHECK(t.context_count() == 1);
  CHECK(t.total(Zone::Initial, U"") == 4);
  CHECK(serialized(t) == "posgram v1 order=4 alphabet=ab\nINITIAL\t\ta\t3\nINITIAL\t\tb\t1\n");
  CHECK(t.score("ab") == doctest::Approx(std::log(0.75) + PositionalNgramModel::kFloorLogProb));
}

TEST_CASE("the shipped desk model is what training produces") {
  std::ifstream in(testing::data_dir() / "wordlists" / "sv.tsv");
  const auto retrained = PositionalNgramModel::train(load_word_counts(in, Alphabet::swedish()));
  CHECK(serialized(retrained) == testing::read_file(testing::data_dir() / "models" / "sv.posgram"));
}

TEST_CASE("mangled headers are rejected") {
  const auto body = serialized(testing::desk_model("sv"));
  const auto nl = body.find('\n');
  const std::string header = body.substr(0, nl);
  const std::string rest = body.substr(nl);

  auto rejects = [&](const std::string& h) {
    std::istringstream in(h + rest);
    try {
      PositionalNgramModel::deserialize(in);
    } catch (const FormatError& e) {
      return e.line() >= 1;
    }
    return false;
  };

  for (std::size_t cut = 0; cut < header.size(); ++cut) REQUIRE(rejects(header.substr(0, cut)));
  const std::string junk = "#!%&*+/:;<>?@^|~\xFF";
  for (std::size_t pos = 0; pos < header.size(); ++pos) {
    for (char c : junk) {
      std::string h = header;
      if (h[pos] == c) continue;
      h[pos] = c;
      REQUIRE(rejects(h));
    }
  }
  CHECK(rejects("posgram v2 order=4 alphabet=abcdefghijklmnopqrstuvwxyzåäö"));
  CHECK(rejects("posgram v1 order=9 alphabet=abcdefghijklmnopqrstuvwxyzåäö"));
  CHECK(rejects("posgram v1 order=4 alphabet=abcdefghijklmnopqrstuvwxyzåäöa"));

  std::istringstream empty("");
  CHECK_THROWS_AS(PositionalNgramModel::deserialize(empty), FormatError);
}

TEST_CASE("corrupt entries name their line") {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      PositionalNgramModel::deserialize(in);
    } catch (const FormatError& e) {
      return e.line();
    }
    return 0;
  };
  const std::string h = "posgram v1 order=3 alphabet=ab\nINITIAL\t\ta\t1\n";
  CHECK(line_of(h + "MIDDLE\ta\tb\t1\n") == 3);
  CHECK(line_of(h + "FINAL\tabb\tb\t1\n") == 3);
  CHECK(line_of(h + "FINAL\ta\tc\t1\n") == 3);
  CHECK(line_of(h + "FINAL\ta\tb\tx\n") == 3);
  CHECK(line_of(h + "FINAL\ta\tb\t0\n") == 3);
  CHECK(line_of(h + "FINAL\ta\tb\n") == 3);
  CHECK(line_of("posgram v1 order=3 alphabet=ab\n") == 1);
  CHECK(line_of(h + "FINAL\ta\tb\t1\n") == 0);
}
