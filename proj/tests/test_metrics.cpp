#include <doctest.h>

#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "fixtures.hpp"
#include "hybridrank/metrics.hpp"
#include "hybridrank/rng.hpp"
#include "oracles.hpp"

using hybridrank::Rng;
using hybridrank::mean_sparsity_threshold;
using hybridrank::ndcg_at_k;
using hybridrank::sparsity_index;
using hybridrank::user_auc;

TEST_CASE("user_auc on hand-solvable score sets") {
  CHECK(user_auc(std::vector<double>{3.0}, std::vector<double>{1.0, 2.0}) == 1.0);
  CHECK(user_auc(std::vector<double>{1.0}, std::vector<double>{2.0, 3.0}) == 0.0);
  CHECK(user_auc(std::vector<double>{2.0}, std::vector<double>{2.0}) == 0.5);
  // pairs: (3 > 2) wins, (1 < 2) loses
  CHECK(user_auc(std::vector<double>{3.0, 1.0}, std::vector<double>{2.0}) == 0.5);
  // all scores equal: every pair ties
  CHECK(user_auc(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 1.0, 1.0}) == 0.5);
}

TEST_CASE("user_auc rejects empty sides") {
  CHECK_THROWS_AS(user_auc(std::vector<double>{}, std::vector<double>{1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(user_auc(std::vector<double>{1.0}, std::vector<double>{}),
                  std::invalid_argument);
}

TEST_CASE("user_auc equals pair enumeration on random instances") {
  Rng rng(2024);
  for (int iter = 0; iter < 500; ++iter) {
    const std::size_t nr = 1 + rng.uniform(12);
    const std::size_t ni = 1 + rng.uniform(20);
    std::vector<double> rel(nr), irr(ni);
    // draw from 5 distinct values so ties are common
    for (auto& x : rel) x = static_cast<double>(rng.uniform(5));
    for (auto& x : irr) x = static_cast<double>(rng.uniform(5));
    const double got = user_auc(rel, irr);
    const double want = oracles::pairwise_auc(rel, irr);
    CHECK(std::abs(got - want) < 1e-12);
  }
}

TEST_CASE("ndcg_at_k on hand-solvable rankings") {
  const std::unordered_set<int> rel{9};
  // relevant item in second place of two: 1/log2(3)
  CHECK(ndcg_at_k(std::vector<int>{7, 9}, rel, 2) == doctest::Approx(0.6309297535714575).epsilon(1e-12));
  // relevant first: ideal
  CHECK(ndcg_at_k(std::vector<int>{9, 7}, rel, 2) == 1.0);
  // k truncates before the relevant item
  CHECK(ndcg_at_k(std::vector<int>{7, 9}, rel, 1) == 0.0);
  // no relevant items at all
  CHECK(ndcg_at_k(std::vector<int>{7, 9}, {}, 2) == 0.0);
}

TEST_CASE("ndcg_at_k rejects non-positive k") {
  CHECK_THROWS_AS(ndcg_at_k(std::vector<int>{1}, {1}, 0), std::invalid_argument);
  CHECK_THROWS_AS(ndcg_at_k(std::vector<int>{1}, {1}, -3), std::invalid_argument);
}

TEST_CASE("ndcg_at_k equals the direct formula on random instances") {
  Rng rng(515);
  for (int iter = 0; iter < 500; ++iter) {
    const std::size_t n = 1 + rng.uniform(25);
    std::vector<int> ranked(n);
    for (std::size_t i = 0; i < n; ++i) ranked[i] = static_cast<int>(i);
    rng.shuffle(ranked);
    std::unordered_set<int> relevant;
    const std::size_t nrel = rng.uniform(n + 1);
    for (const int item : rng.sample(ranked, nrel)) relevant.insert(item);
    const int k = 1 + static_cast<int>(rng.uniform(12));
    const double got = ndcg_at_k(ranked, relevant, k);
    const double want = oracles::ndcg(ranked, relevant, k);
    CHECK(std::abs(got - want) < 1e-12);
  }
}

TEST_CASE("sparsity helpers") {
  CHECK(sparsity_index(5, 100) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(sparsity_index(0, 10) == 0.0);

  // degrees 2 and 3 over a 4-item catalog: mean(0.5, 0.75)
  const auto data = fixtures::make_dataset(2, 4,
                                           {{0, 0, 4.0, 1},
                                            {0, 1, 3.0, 2},
                                            {1, 0, 5.0, 3},
                                            {1, 2, 2.0, 4},
                                            {1, 3, 1.0, 5}});
  CHECK(mean_sparsity_threshold(data) == doctest::Approx(0.625).epsilon(1e-15));
}
