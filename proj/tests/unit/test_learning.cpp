#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "../helpers.hpp"
#include "../oracles.hpp"
#include "efe/learning.hpp"

using namespace efe;
using testing::error_kind;

namespace {

std::vector<BeliefState> beliefs(const std::vector<std::vector<double>>& dists) {
  std::vector<BeliefState> out;
  for (std::size_t k = 0; k < dists.size(); ++k) out.push_back(BeliefState{dists[k], k});
  return out;
}

double column_entropy(const std::vector<double>& col) { return entropy(col); }

}  // namespace

TEST_SUITE("learning") {

TEST_CASE("one-hot observation and Dirac posterior add exactly one") {
  const DirichletPrior prior = DirichletPrior::uniform(3, 4, 0.5);
  const std::vector<std::size_t> obs{2};
  const DirichletPrior post = dirichlet_update(prior, obs, beliefs({{0, 0, 1, 0}}));
  for (std::size_t o = 0; o < 3; ++o)
    for (std::size_t s = 0; s < 4; ++s) CHECK(post.a(o, s) == (o == 2 && s == 2 ? 1.5 : 0.5));
}

TEST_CASE("uniform posterior spreads 1/n over the observed row") {
  const DirichletPrior prior = DirichletPrior::uniform(2, 4, 1.0);
  const std::vector<std::size_t> obs{1};
  const DirichletPrior post = dirichlet_update(prior, obs, beliefs({{0.25, 0.25, 0.25, 0.25}}));
  for (std::size_t s = 0; s < 4; ++s) {
    CHECK(post.a(1, s) == 1.25);
    CHECK(post.a(0, s) == 1.0);
  }
}

TEST_CASE("count matrix read-out") {
  const ObsStateMatrix zero(3, 2);
  const std::vector<std::size_t> obs{1};
  const ObsStateMatrix counts = count_update(zero, obs, beliefs({{0, 1}}));
  CHECK(error_kind([&] { normalize_columns(counts); }) == ErrorKind::ZeroColumn);
  ObsStateMatrix both = count_update(counts, std::vector<std::size_t>{0}, beliefs({{1, 0}}));
  const auto lik = normalize_columns(both);
  CHECK(lik[1] == std::vector<double>{0, 1, 0});
  CHECK(lik[0] == std::vector<double>{1, 0, 0});
}

TEST_CASE("expected likelihood examples") {
  const auto flat = expected_likelihood(DirichletPrior::uniform(4, 3, 2.0));
  for (const auto& col : flat)
    for (double p : col) CHECK(p == 0.25);
  DirichletPrior prior{ObsStateMatrix(2, 1)};
  prior.a(0, 0) = 3;
  prior.a(1, 0) = 1;
  CHECK(expected_likelihood(prior)[0] == std::vector<double>{0.75, 0.25});
}

TEST_CASE("updates commute across episodes") {
  // Dyadic posteriors make every partial sum exact, so order cannot matter.
  const DirichletPrior prior = DirichletPrior::uniform(2, 3, 1.0);
  const std::vector<std::size_t> o1{0, 1, 1};
  const auto q1 = beliefs({{0.5, 0.25, 0.25}, {0, 0.75, 0.25}, {0.125, 0.125, 0.75}});
  const std::vector<std::size_t> o2{1, 0};
  const auto q2 = beliefs({{0.375, 0.5, 0.125}, {1, 0, 0}});
  const auto ab = dirichlet_update(dirichlet_update(prior, o1, q1), o2, q2);
  const auto ba = dirichlet_update(dirichlet_update(prior, o2, q2), o1, q1);
  CHECK(ab.a == ba.a);

  // Generic posteriors from inference: equal up to rounding.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RandomSpec spec = testing::spec(seed, 3, 2, 3);
    spec.n_obs = 3;
    const FinitePomdp pomdp = gen_random_pomdp(spec);
    const PomdpAgent agent = [](std::size_t t, std::span<const std::size_t>, std::span<const std::size_t>) {
      return t % 2;
    };
    const Episode e1 = rollout(pomdp, agent, seed);
    const Episode e2 = rollout(pomdp, agent, seed + 100);
    const auto p1 = exact_posterior(pomdp, e1.actions, *e1.observations).smoothed;
    const auto p2 = exact_posterior(pomdp, e2.actions, *e2.observations).smoothed;
    const DirichletPrior start = DirichletPrior::uniform(3, 3, 1.0);
    const auto x = dirichlet_update(dirichlet_update(start, *e1.observations, p1), *e2.observations, p2);
    const auto y = dirichlet_update(dirichlet_update(start, *e2.observations, p2), *e1.observations, p1);
    for (std::size_t i = 0; i < x.a.values.size(); ++i) CHECK(std::abs(x.a.values[i] - y.a.values[i]) <= 1e-12);
    // Each episode adds T + 1 units of mass.
    CHECK(std::abs(x.a.total() - start.a.total() - 2 * 4) <= 1e-12);
  }
}

TEST_CASE("concentrating updates lower column entropy") {
  DirichletPrior prior = DirichletPrior::uniform(4, 2, 1.0);
  double previous = column_entropy(expected_likelihood(prior)[1]);
  const std::vector<std::size_t> obs{3};
  for (int k = 0; k < 30; ++k) {
    prior = dirichlet_update(prior, obs, beliefs({{0.1, 0.9}}));
    const double h = column_entropy(expected_likelihood(prior)[1]);
    CHECK(h < previous);
    previous = h;
  }
}

TEST_CASE("update argument checks") {
  const DirichletPrior prior = DirichletPrior::uniform(2, 2, 1.0);
  const std::vector<std::size_t> obs{0, 1};
  CHECK(error_kind([&] { dirichlet_update(prior, obs, beliefs({{1, 0}})); }) == ErrorKind::LengthMismatch);
  CHECK(error_kind([&] { dirichlet_update(prior, obs, beliefs({{1, 0}, {0.5, 0.4}})); }) == ErrorKind::NotADistribution);
  CHECK(error_kind([&] { dirichlet_update(prior, obs, beliefs({{1, 0}, {0.5, 0.25, 0.25}})); }) ==
        ErrorKind::DimensionMismatch);
  CHECK(error_kind([] { DirichletPrior::uniform(2, 2, 0.0); }) == ErrorKind::OutOfRange);
  DirichletPrior broken = prior;
  broken.a(0, 1) = 0;
  broken.a(1, 1) = 0;
  CHECK(error_kind([&] { validate_prior(broken); }) == ErrorKind::ZeroColumn);
  broken.a(1, 1) = -1;
  CHECK(error_kind([&] { validate_prior(broken); }) == ErrorKind::NotADistribution);
}

TEST_CASE("column TV and median") {
  const FinitePomdp tmaze = gen_tmaze(0.8);
  std::vector<std::vector<double>> truth;
  for (std::size_t s = 0; s < tmaze.n_states(); ++s) {
    const auto row = tmaze.likelihood_row(s);
    truth.emplace_back(row.begin(), row.end());
  }
  for (double tv : column_tv(truth, tmaze)) CHECK(tv == 0.0);
  truth[2] = std::vector<double>(7, 1.0 / 7);
  CHECK(column_tv(truth, tmaze)[2] == doctest::Approx(0.5 * (0.8 - 1.0 / 7 + 0.2 - 1.0 / 7 + 5.0 / 7)));
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 2, 3}) == 2.5);
}

TEST_CASE("run_learning is reproducible and checkpoints at doubling episodes") {
  RandomSpec spec = testing::spec(21, 3, 2, 4);
  spec.n_obs = 3;
  const FinitePomdp pomdp = gen_random_pomdp(spec);
  LearningOptions options;
  options.episodes = 40;
  options.seed = 5;
  const LearningResult a = run_learning(pomdp, options);
  const LearningResult b = run_learning(pomdp, options);
  CHECK(a.prior.a == b.prior.a);
  std::vector<std::size_t> episodes;
  for (const auto& m : a.metrics) episodes.push_back(m.episode);
  CHECK(episodes == std::vector<std::size_t>{1, 2, 4, 8, 16, 32, 40});
  CHECK(std::abs(a.prior.a.total() - (9.0 + 40 * 5)) <= 1e-9);
  CHECK(a.metrics.back().min_column_mass > 0.0);

  const std::string csv = metrics_csv(a.metrics);
  CHECK(csv.rfind("# efe-planner learning metrics v1\nepisode,tv_distance_to_truth,mean_column_entropy\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 7);
}

}  // TEST_SUITE
