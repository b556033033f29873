#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "e2g/metrics.hpp"
#include "oracle.hpp"

using namespace e2g;

namespace {

// Random string pairs biased toward shared tokens, articles, punctuation and
// numeric forms so the oracle comparison exercises every branch.
struct PairGen {
  std::mt19937 rng{20240917};
  std::vector<std::string> vocab{
      "the",  "a",     "an",     "Walmart", "founded", "in",    "1962,",
      "Sam",  "walton", "ARKANSAS", "cat!",  "dog",     "42",    "456.0",
      "456",  "3.14",  "0.5",    "it's",    "multi-hop", "QA",  "evidence;",
      "B",    "yes",   "No.",    "(maybe)", "olympics", "winter"};

  std::string word() { return vocab[rng() % vocab.size()]; }

  std::string sentence(std::size_t max_len) {
    std::size_t n = rng() % (max_len + 1);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
      if (!out.empty()) out += (rng() % 8 == 0) ? "  " : " ";
      out += word();
    }
    return out;
  }

  std::pair<std::string, std::string> next() {
    switch (rng() % 4) {
      case 0:  // independent
        return {sentence(8), sentence(8)};
      case 1: {  // shared prefix
        std::string base = sentence(5);
        return {base + " " + sentence(3), base + " " + sentence(3)};
      }
      case 2: {  // same content, different casing/articles
        std::string base = sentence(6);
        return {"The " + base, base + "."};
      }
      default:  // numeric forms
        return {std::string(rng() % 2 ? "456.0" : "456"),
                std::string(rng() % 2 ? "456" : "457")};
    }
  }
};

}  // namespace

TEST_CASE("normalize_text pinned examples") {
  CHECK(normalize_text("The Cat!") == "cat");
  CHECK(normalize_text("") == "");
  CHECK(normalize_text("A  B the C") == "b c");
}

TEST_CASE("normalize_text is idempotent") {
  PairGen gen;
  for (int i = 0; i < 300; ++i) {
    auto [s, _] = gen.next();
    std::string once = normalize_text(s);
    CHECK(normalize_text(once) == once);
  }
}

TEST_CASE("exact_match pinned examples") {
  CHECK(exact_match("Eiffel Tower", {"Eiffel Tower"}) == 1);
  CHECK(exact_match("the Eiffel Tower", {"Eiffel Tower"}) == 1);
  CHECK(exact_match("Eiffel", {"Eiffel Tower"}) == 0);
  // numeric fallback for arithmetic answers
  CHECK(exact_match("456.0", {"456"}) == 1);
  CHECK(exact_match("456.5", {"456"}) == 0);
}

TEST_CASE("token_f1 pinned examples") {
  CHECK(token_f1("obama", {"barack obama"}) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(token_f1("barack obama", {"barack obama"}) == doctest::Approx(1.0));
  CHECK(token_f1("paris", {"london bridge"}) == doctest::Approx(0.0));
  // empty-side contract
  CHECK(token_f1("", {""}) == doctest::Approx(1.0));
  CHECK(token_f1("the", {""}) == doctest::Approx(1.0));  // both empty after normalization
  CHECK(token_f1("", {"x"}) == doctest::Approx(0.0));
  CHECK(token_f1("x", {""}) == doctest::Approx(0.0));
}

TEST_CASE("string-equal exact match implies perfect f1") {
  // the numeric fallback ("456.0" vs "456") is exempt: tokens differ there
  PairGen gen;
  for (int i = 0; i < 500; ++i) {
    auto [p, g] = gen.next();
    if (normalize_text(p) == normalize_text(g) && !normalize_tokens(g).empty()) {
      CHECK(exact_match(p, {g}) == 1);
      CHECK(token_f1(p, {g}) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("token_f1 symmetric for single gold") {
  PairGen gen;
  for (int i = 0; i < 500; ++i) {
    auto [p, g] = gen.next();
    CHECK(token_f1(p, {g}) == doctest::Approx(token_f1(g, {p})).epsilon(1e-12));
  }
}

TEST_CASE("metrics agree with brute-force oracle on randomized pairs") {
  PairGen gen;
  for (int i = 0; i < 1000; ++i) {
    auto [p, g] = gen.next();
    CHECK(exact_match(p, {g}) == oracle::exact_match(p, {g}));
    double mine = token_f1(p, {g});
    double ref = oracle::token_f1(p, {g});
    CHECK(std::abs(mine - ref) <= 1e-12);
  }
}

TEST_CASE("accuracy") {
  CHECK(accuracy(std::string("SUPPORTS"), "SUPPORTS") == 1);
  CHECK(accuracy(std::string("REFUTES"), "SUPPORTS") == 0);
  CHECK(accuracy(std::string("supports"), "SUPPORTS") == 1);
  CHECK(accuracy(std::nullopt, "SUPPORTS") == 0);
}

TEST_CASE("aggregate means and counts") {
  std::vector<ScoreRow> rows;
  rows.push_back({"a", 1, 1.0, std::nullopt, false});
  rows.push_back({"b", 0, 0.0, std::nullopt, false});
  ScoreReport rep = aggregate(rows);
  REQUIRE(rep.f1_pct.has_value());
  CHECK(*rep.f1_pct == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(*rep.em_pct == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(!rep.acc_pct.has_value());
  CHECK(rep.count == 2);
}

TEST_CASE("aggregate of empty input flags undefined means") {
  ScoreReport rep = aggregate({});
  CHECK(rep.count == 0);
  CHECK(!rep.em_pct.has_value());
  CHECK(!rep.f1_pct.has_value());
  CHECK(!rep.acc_pct.has_value());
}

TEST_CASE("aggregate invariant under permutation") {
  std::mt19937 rng(7);
  std::vector<ScoreRow> rows;
  for (int i = 0; i < 40; ++i) {
    ScoreRow r;
    r.id = "i" + std::to_string(i);
    r.em = static_cast<int>(rng() % 2);
    r.f1 = static_cast<double>(rng() % 1000) / 1000.0;
    if (rng() % 2) r.acc = static_cast<int>(rng() % 2);
    rows.push_back(r);
  }
  ScoreReport base = aggregate(rows);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(rows.begin(), rows.end(), rng);
    ScoreReport shuffled = aggregate(rows);
    CHECK(*shuffled.em_pct == doctest::Approx(*base.em_pct).epsilon(1e-9));
    CHECK(*shuffled.f1_pct == doctest::Approx(*base.f1_pct).epsilon(1e-9));
    CHECK(shuffled.acc_count == base.acc_count);
    if (base.acc_pct) CHECK(*shuffled.acc_pct == doctest::Approx(*base.acc_pct).epsilon(1e-9));
  }
}
