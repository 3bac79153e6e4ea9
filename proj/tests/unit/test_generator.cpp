#include <set>

#include "doctest.h"
#include "nonword/errors.hpp"
#include "nonword/generator.hpp"
#include "support.hpp"

using namespace nonword;

namespace {

PositionalNgramModel train_on(std::initializer_list<std::pair<const char*, std::uint64_t>> words) {
  WordFrequencyTable t(Alphabet::swedish());
  for (const auto& [w, n] : words) t.add(w, n);
  return PositionalNgramModel::train(t);
}

std::vector<std::string> texts(const std::vector<Candidate>& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs) out.push_back(c.text);
  return out;
}

}  // namespace

TEST_CASE("exhaustive enumeration over a toy alphabet") {
  std::vector<std::string> got;
  for (const auto& w : exhaustive(Alphabet::from_utf8("ab"), 2)) got.push_back(w);
  CHECK(got == std::vector<std::string>{"aa", "ab", "ba", "bb"});
}

TEST_CASE("exhaustive enumeration over the Swedish alphabet") {
  const auto sv = Alphabet::swedish();
  CHECK(exhaustive(sv, 2).size() == 841);
  CHECK(exhaustive(sv, 3).size() == 24389);
  CHECK(exhaustive(sv, 5).size() == 20511149);

  for (std::size_t length : {2u, 3u}) {
    std::vector<std::u32string> all;
    for (const auto& w : exhaustive(sv, length)) all.push_back(utf8::decode(w));
    REQUIRE(all.size() == exhaustive(sv, length).size());
    for (std::size_t i = 1; i < all.size(); ++i) REQUIRE(sv.less(all[i - 1], all[i]));  // strictly increasing
    CHECK(std::set<std::u32string>(all.begin(), all.end()).size() == all.size());
    if (length == 3) {
      CHECK(all.front() == U"aaa");
      CHECK(all.back() == U"ööö");
    }
  }

  std::uint64_t n4 = 0;
  for ([[maybe_unused]] const auto& w : exhaustive(sv, 4)) ++n4;
  CHECK(n4 == 707281);

  // length six is only ever computed, never enumerated
  std::uint64_t six = 1;
  for (int i = 0; i < 6; ++i) six *= sv.size();
  CHECK(six == 594823321);

  CHECK_THROWS_AS(exhaustive(sv, 1), RangeError);
  CHECK_THROWS_AS(exhaustive(sv, 6), RangeError);
}

TEST_CASE("a single-path model can only produce its word") {
  const auto m = train_on({{"abcdef", 1}});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto c = sample_word(m, 6, rng);
    REQUIRE(c.text == "abcdef");
    REQUIRE(c.length == 6);
    REQUIRE(c.provenance == Provenance::Sampled);
  }
}

TEST_CASE("sampled words obey the model") {
  const auto& sv = testing::desk_model("sv");
  Rng rng(123);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t length = 6 + rng.below(6);
    const auto c = sample_word(sv, length, rng);
    const auto w = utf8::decode(c.text);
    REQUIRE(w.size() == length);
    REQUIRE(c.length == length);
    REQUIRE(sv.alphabet().indices(w));
    // every transition was seen in training, under its zone
    for (std::size_t j = 0; j < w.size(); ++j) {
      const std::size_t stub = std::min<std::size_t>(j, sv.order() - 1);
      REQUIRE(sv.count(zone_of(j, w.size()), std::u32string_view(w).substr(j - stub, stub), w[j]) > 0);
    }
  }
}

TEST_CASE("sampling is reproducible") {
  const auto& sv = testing::desk_model("sv");
  Rng a(42), b(42);
  for (int i = 0; i < 200; ++i) REQUIRE(sample_word(sv, 7, a).text == sample_word(sv, 7, b).text);

  // pinned: the generator is a fixed algorithm over mt19937_64, so these
  // hold on every platform
  Rng pinned(42);
  std::vector<std::string> first;
  for (int i = 0; i < 5; ++i) first.push_back(sample_word(sv, 6, pinned).text);
  CHECK(first == std::vector<std::string>{"litett", "frågan", "isente", "allven", "elades"});
}

TEST_CASE("dead ends restart until the budget runs out") {
  const auto m = train_on({{"ab", 1}});  // nothing follows "a" word-initially
  Rng rng(1);
  CHECK_THROWS_AS(sample_word(m, 6, rng, 10), GenerationExhausted);
  CHECK_THROWS_AS(sample_word(m, 5, rng), RangeError);
  CHECK_THROWS_AS(sample_word(m, 12, rng), RangeError);
}

TEST_CASE("batches are distinct and ordered by first generation") {
  const auto& sv = testing::desk_model("sv");
  Rng rng(7);
  const auto batch = sample_batch(sv, 6, 10000, rng);
  CHECK(batch.size() == 10000);
  const auto t = texts(batch);
  CHECK(std::set<std::string>(t.begin(), t.end()).size() == 10000);

  Rng one(7);
  const auto single = sample_batch(sv, 6, 1, one);
  REQUIRE(single.size() == 1);
  CHECK(single[0].text == batch[0].text);

  Rng other(8);
  CHECK(texts(sample_batch(sv, 6, 100, other)) != std::vector<std::string>(t.begin(), t.begin() + 100));

  // replaying the raw word stream and dropping repeats gives the batch
  Rng replay(7);
  std::vector<std::string> expected;
  std::set<std::string> seen;
  while (expected.size() < 500) {
    auto w = sample_word(sv, 6, replay).text;
    if (seen.insert(w).second) expected.push_back(w);
  }
  CHECK(expected == std::vector<std::string>(t.begin(), t.begin() + 500));
}

TEST_CASE("an exhausted batch reports what it produced") {
  const auto m = train_on({{"abcdef", 1}});
  Rng rng(1);
  try {
    sample_batch(m, 6, 2, rng);
    FAIL("expected an error");
  } catch (const PartialResultError& e) {
    CHECK(e.generated() == std::vector<std::string>{"abcdef"});
  }
  try {
    sample_batch_sharded(m, 6, 2, 1, 3);
    FAIL("expected an error");
  } catch (const PartialResultError& e) {
    CHECK(e.generated() == std::vector<std::string>{"abcdef"});
  }
  CHECK_THROWS_AS(sample_batch(m, 6, 0, rng), RangeError);
}

TEST_CASE("sharded sampling does not depend on the worker count") {
  const auto& sv = testing::desk_model("sv");
  const auto base = texts(sample_batch_sharded(sv, 8, 3000, 99, 1));
  CHECK(base.size() == 3000);
  CHECK(std::set<std::string>(base.begin(), base.end()).size() == 3000);
  for (unsigned workers : {2u, 3u, 8u}) CHECK(texts(sample_batch_sharded(sv, 8, 3000, 99, workers)) == base);
  CHECK(texts(sample_batch_sharded(sv, 8, 3000, 100, 2)) != base);
  // a shorter request is a prefix of a longer one
  const auto prefix = texts(sample_batch_sharded(sv, 8, 100, 99, 4));
  CHECK(prefix == std::vector<std::string>(base.begin(), base.begin() + 100));
}
