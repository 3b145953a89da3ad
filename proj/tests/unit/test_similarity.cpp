#include "doctest.h"

#include "../oracles/oracles.hpp"
#include "mextract/random.hpp"
#include "mextract/similarity.hpp"
#include "mextract/text_util.hpp"

using namespace mextract;

namespace {

// Draws whole UTF-8 characters from `alphabet`.
std::string random_string(Rng& rng, std::size_t max_len, const std::string& alphabet) {
  std::vector<std::string> chars;
  for (char c : alphabet) {
    if ((static_cast<unsigned char>(c) & 0xC0) == 0x80) chars.back() += c;
    else chars.emplace_back(1, c);
  }
  std::string s;
  for (auto n = rng.below(max_len + 1); n > 0; --n) s += chars[rng.below(chars.size())];
  return s;
}

}  // namespace

TEST_CASE("oracles agree with hand-computed values") {
  CHECK(oracle::string_similarity("SQuAD 1.0", "SQuAD v1.0") == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(oracle::number_similarity(340, 110) == doctest::Approx(1.0 - 230.0 / 340.0));
  CHECK(oracle::year_similarity(2018, 2020) == 0.8);
  CHECK(oracle::rouge_l_f("the quick brown fox", "the brown fox") == doctest::Approx(6.0 / 7.0));
  CHECK(oracle::lcs_exhaustive({"a", "b", "c", "d"}, {"b", "d", "a"}) == 2);
  CHECK(oracle::edit_distance(U"kitten", U"sitting") == 3);
}

TEST_CASE("sim_number") {
  CHECK(sim_number(340, 340) == 1.0);
  CHECK(sim_number(0, 0) == 1.0);
  CHECK(sim_number(340, 110) == doctest::Approx(0.3235).epsilon(1e-4));
  CHECK(sim_number(5, 0) == 0.0);
  CHECK(sim_number(-3, -1) == 0.0);
  CHECK(sim_number(110, 340) == sim_number(340, 110));
}

TEST_CASE("sim_year") {
  CHECK(sim_year(2018, 2018) == 1.0);
  CHECK(sim_year(2018, 2020) == 0.8);
  CHECK(sim_year(2011, 2009) == 1.0);
  CHECK(sim_year(2025, 0) == doctest::Approx(1.0 / 15.0));
}

TEST_CASE("sim_string, sim_url and options") {
  CHECK(sim_string("SQuAD 1.0", "SQuAD v1.0") == doctest::Approx(0.9).epsilon(1e-12));
  const std::vector<std::string> unit = {"Million", "Billion", "Trillion"};
  CHECK(sim_string("Million", "Million", &unit) == 1.0);
  CHECK(sim_string("Million", "million", &unit) == 0.0);
  CHECK(sim_string(" Million ", "Million", &unit) == 1.0);
  const std::vector<std::string> license = {"Apache-2.0", "MIT License"};
  CHECK(sim_string("Apache-2.0", "MIT License", &license) == 0.0);
  CHECK(sim_string("", "") == 1.0);
  CHECK(sim_url("https://arxiv.org/pdf/1810.04805", "https://arxiv.org/pdf/1810.04805") == 1.0);
  CHECK(sim_url("https://a.com/x", "https://a.com/y") == doctest::Approx(1.0 - 1.0 / 15.0));
  CHECK(sim_url("", "https://a.com") == 0.0);
  // Code points, not bytes.
  CHECK(levenshtein("café", "cafe") == 1);
  CHECK(sim_string("日本語", "日本") == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("sim_longstr") {
  CHECK(sim_longstr("a b c", "a b c") == 1.0);
  CHECK(sim_longstr("the quick brown fox", "the brown fox") == doctest::Approx(6.0 / 7.0).epsilon(1e-12));
  CHECK(sim_longstr("abc", "") == 0.0);
  CHECK(sim_longstr("", "") == 1.0);
  CHECK(sim_longstr("The Cat", "the cat") == 1.0);
}

TEST_CASE("sim_list") {
  const std::vector<std::string> five = {"GLUE", "SQuAD v1.1", "SQuAD v2.0", "SWAG", "CoNLL-2003 NER"};
  CHECK(sim_list(five, five) == 1.0);
  CHECK(sim_list({"GLUE", "SWAG", "SQuAD"}, {"GLUE"}) == doctest::Approx(1.0 / 3.0));
  CHECK(sim_list(five, {"GLUE", "SWAG", "SQuAD v2.0", "MNLI"}) == 0.6);
  CHECK(sim_list({}, {}) == 1.0);
  CHECK(sim_list({"a", "a", " b"}, {"b", "a"}) == 1.0);
}

TEST_CASE("library metrics match the oracles on random inputs") {
  Rng rng(2024);
  for (int i = 0; i < 3000; ++i) {
    const std::string a = random_string(rng, 8, "abcd é");
    const std::string b = random_string(rng, 8, "abcd é");
    const auto ca = oracle::code_points(a);
    const auto cb = oracle::code_points(b);
    REQUIRE(levenshtein(a, b) == oracle::edit_distance(ca, cb));
    REQUIRE(sim_string(a, b) == doctest::Approx(oracle::string_similarity(a, b)).epsilon(1e-12));

    const std::string ta = random_string(rng, 12, "xyz  ");
    const std::string tb = random_string(rng, 12, "xyZ  ");
    auto toks_a = oracle::lower_tokens(ta);
    auto toks_b = oracle::lower_tokens(tb);
    REQUIRE(lcs_length(toks_a, toks_b) == oracle::lcs_exhaustive(toks_a, toks_b));
    REQUIRE(sim_longstr(ta, tb) == doctest::Approx(oracle::rouge_l_f(ta, tb)).epsilon(1e-12));

    const double x = static_cast<double>(rng.between(-50, 500));
    const double y = static_cast<double>(rng.between(-50, 500));
    REQUIRE(sim_number(x, y) == oracle::number_similarity(x, y));
    const auto ya = rng.between(1950, 2030);
    const auto yb = rng.between(1950, 2030);
    REQUIRE(sim_year(ya, yb) == oracle::year_similarity(ya, yb));

    std::vector<std::string> la, lb;
    for (auto n = rng.below(6); n > 0; --n) la.push_back(std::string(1, "pqrst"[rng.below(5)]));
    for (auto n = rng.below(6); n > 0; --n) lb.push_back(std::string(1, "pqrst"[rng.below(5)]));
    REQUIRE(sim_list(la, lb) == oracle::list_similarity(la, lb));
  }
}

TEST_CASE("similarity properties: range, reflexivity, symmetry, permutation") {
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    const std::string a = random_string(rng, 10, "ab c");
    const std::string b = random_string(rng, 10, "ab c");
    for (double v : {sim_string(a, b), sim_longstr(a, b), sim_url(a, b)}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(sim_string(a, a) == 1.0);
    CHECK(sim_longstr(a, a) == 1.0);
    CHECK(sim_string(a, b) == sim_string(b, a));
    CHECK(sim_longstr(a, b) == doctest::Approx(sim_longstr(b, a)).epsilon(1e-12));

    std::vector<std::string> l = {"a", "b", "c", "d"};
    l.resize(rng.below(5));
    auto shuffled = l;
    rng.shuffle(shuffled);
    auto doubled = l;
    doubled.insert(doubled.end(), l.begin(), l.end());
    const std::vector<std::string> other = {"b", "e"};
    CHECK(sim_list(l, other) == sim_list(shuffled, other));
    CHECK(sim_list(doubled, other) == sim_list(l, other));
    CHECK(sim_list(l, other) == sim_list(other, l));
  }
}
