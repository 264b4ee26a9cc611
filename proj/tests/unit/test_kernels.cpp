#include <doctest.h>

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "../helpers.hpp"
#include "efe/dp.hpp"
#include "efe/kernels.hpp"
#include "efe/rng.hpp"

using namespace efe;

TEST_SUITE("kernels") {

TEST_CASE("bellman slice: serial and parallel agree bitwise") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RandomSpec spec = testing::spec(seed, 60, 5, 3);
    spec.sparsity = seed % 2 ? 0.5 : 0.0;
    const FiniteMdp mdp = gen_random_mdp(spec);
    Rng rng(seed);
    std::vector<double> next(mdp.n_states());
    for (double& v : next) v = rng.uniform() * 4;
    std::vector<double> a(mdp.n_states() * mdp.n_actions()), b(a.size());
    kernels::bellman_slice(mdp, next, a, Exec::Serial);
    kernels::bellman_slice(mdp, next, b, Exec::Parallel);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
    // Direct sum for one entry.
    double q = 0.0;
    for (std::size_t n = 0; n < mdp.n_states(); ++n) q += mdp.transition(2, 7, n) * (mdp.reward(n) + next[n]);
    CHECK(std::abs(a[7 * mdp.n_actions() + 2] - q) <= 1e-12);
  }
}

TEST_CASE("deterministic evaluation matches policy evaluation") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FiniteMdp mdp = gen_random_mdp(testing::sized_spec(seed, 6, 4, 5));
    Rng rng(seed + 50);
    std::vector<std::size_t> choice(mdp.horizon() * mdp.n_states());
    for (auto& c : choice) c = rng.index(mdp.n_actions());
    std::vector<double> values((mdp.horizon() + 1) * mdp.n_states());
    kernels::evaluate_deterministic(mdp, choice, values);
    const ValueFunction v = evaluate_policy(mdp, StateActionPolicy::deterministic(mdp, choice));
    for (std::size_t i = 0; i < values.size(); ++i) CHECK(std::abs(values[i] - v.data()[i]) <= 1e-12);
  }
}

TEST_CASE("parallel_for visits every index and rethrows") {
  set_threads(4);
  CHECK(max_threads() >= 1);
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), Exec::Parallel, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(100, Exec::Parallel,
                               [](std::size_t i) {
                                 if (i == 37) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
  CHECK(testing::error_kind([] {
          parallel_for(10, Exec::Serial, [](std::size_t) { fail(ErrorKind::TooLarge, "x"); });
        }) == ErrorKind::TooLarge);
  set_threads(0);
}

}  // TEST_SUITE
