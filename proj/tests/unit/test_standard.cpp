#include <doctest.h>

#include <cmath>

#include "../helpers.hpp"
#include "../oracles.hpp"
#include "efe/dp.hpp"
#include "efe/standard.hpp"

using namespace efe;
using testing::error_kind;
using testing::make_mdp;

namespace {

bool contains(const std::vector<std::size_t>& set, std::size_t x) {
  return std::find(set.begin(), set.end(), x) != set.end();
}

// Posterior over first actions from enumerated G values.
std::vector<double> oracle_posterior(const FiniteMdp& mdp, double beta, std::size_t s, std::size_t len) {
  const auto c = oracle::softmax_prefs(mdp, beta);
  std::vector<double> g;
  std::vector<std::size_t> first;
  oracle::for_each_tuple(mdp.n_actions(), len, [&](const std::vector<std::size_t>& acts) {
    g.push_back(oracle::enumerate_efe(mdp, acts, s, c).g);
    first.push_back(acts[0]);
  });
  const double low = *std::min_element(g.begin(), g.end());
  std::vector<double> post(mdp.n_actions(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = std::exp(low - g[i]);
    post[first[i]] += w;
    z += w;
  }
  for (double& p : post) p /= z;
  return post;
}

// First actions whose sequences reach the best expected reward, ranked by the
// sum of exp(entropy) over those reward-maximizing sequences.
std::vector<std::size_t> oracle_limit_choice(const FiniteMdp& mdp, std::size_t s, std::size_t len) {
  const std::size_t A = mdp.n_actions();
  std::vector<double> best(A, -INFINITY);
  std::vector<std::vector<std::pair<double, double>>> terms(A);
  oracle::for_each_tuple(A, len, [&](const std::vector<std::size_t>& acts) {
    const auto t = oracle::enumerate_efe(mdp, acts, s, {});
    best[acts[0]] = std::max(best[acts[0]], t.expected_reward);
    terms[acts[0]].push_back({t.expected_reward, t.entropy});
  });
  const double top = *std::max_element(best.begin(), best.end());
  std::vector<double> mass(A, 0.0);
  for (std::size_t a = 0; a < A; ++a) {
    if (best[a] < top - 1e-9) continue;
    for (auto [er, h] : terms[a])
      if (er >= best[a] - 1e-9) mass[a] += std::exp(h);
  }
  const double m = *std::max_element(mass.begin(), mass.end());
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < A; ++a)
    if (mass[a] > 0.0 && mass[a] >= m * (1 - 1e-12)) out.push_back(a);
  return out;
}

}  // namespace

TEST_SUITE("standard") {

TEST_CASE("single action gives a Dirac posterior") {
  const FiniteMdp mdp = gen_random_mdp(testing::spec(3, 4, 1, 3));
  for (const PreferenceMode mode : {PreferenceMode{Beta{1.0}}, PreferenceMode{ZeroTemperature{}}}) {
    const StandardPlan plan = standard_plan(mdp, build_preferences(mdp.reward(), mode), 2, 0);
    CHECK(plan.chosen == 0);
    CHECK(plan.action_posterior == std::vector<double>{1.0});
    CHECK(plan.per_sequence.size() == 1);
  }
}

TEST_CASE("sequences are enumerated lexicographically") {
  const auto seqs = enumerate_sequences(3, 2, {}, 1e6);
  REQUIRE(seqs.size() == 9);
  CHECK(seqs[0] == ActionSequence{0, 0});
  CHECK(seqs[1] == ActionSequence{0, 1});
  CHECK(seqs[8] == ActionSequence{2, 2});
  CHECK(enumerate_sequences(3, 2, {false, true, false}, 1e6).size() == 3);
  CHECK(error_kind([] { enumerate_sequences(4, 11, {}, 1e6); }) == ErrorKind::TooLarge);
}

TEST_CASE("finite-beta posterior matches enumeration") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const FiniteMdp mdp = gen_random_mdp(testing::sized_spec(seed, 4, 3, 3));
    const double beta = 0.5 + (seed % 4);
    const std::size_t t = seed % mdp.horizon();
    const std::size_t s = seed % mdp.n_states();
    const StandardPlan plan = standard_plan(mdp, build_preferences(mdp.reward(), Beta{beta}), s, t);
    const auto ref = oracle_posterior(mdp, beta, s, mdp.horizon() - t);
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) CHECK(std::abs(plan.action_posterior[a] - ref[a]) <= 1e-9);
    CHECK(contains(plan.winning_set, plan.chosen));
    CHECK(plan.chosen == plan.winning_set.front());
  }
}

TEST_CASE("limit choice matches the enumerated asymptotic ranking") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    RandomSpec spec = testing::sized_spec(seed, 4, 3, 3, 2);
    spec.reward_ties = seed % 2 == 0;
    spec.deterministic = seed % 3 == 0;
    const FiniteMdp mdp = gen_random_mdp(spec);
    const StandardPlan plan = standard_plan(mdp, build_preferences(mdp.reward(), ZeroTemperature{}), 0, 0);
    CHECK(plan.winning_set == oracle_limit_choice(mdp, 0, mdp.horizon()));
  }
}

TEST_CASE("one step from the horizon the limit choice is Bellman optimal") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const FiniteMdp mdp = gen_random_mdp(testing::sized_spec(seed, 6, 4, 4));
    const BackwardInductionResult bi = backward_induction(mdp);
    const Preferences p = build_preferences(mdp.reward(), ZeroTemperature{});
    const std::size_t t = mdp.horizon() - 1;
    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
      const StandardPlan plan = standard_plan(mdp, p, s, t);
      for (std::size_t a : plan.winning_set) CHECK(contains(bi.argmax(t, s), a));
    }
  }
}

TEST_CASE("equal reward, higher successor entropy wins") {
  // Action 0 -> state 1 surely, action 1 -> states 1 and 2 evenly; both rewarded.
  const FiniteMdp mdp = make_mdp(1, {{{0, 1, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 0.5, 0.5}, {0, 1, 0}, {0, 0, 1}}},
                                 {1, 0, 0}, {0, 1, 1});
  const StandardPlan plan = standard_plan(mdp, build_preferences(mdp.reward(), ZeroTemperature{}), 0, 0);
  CHECK(plan.chosen == 1);
  CHECK(plan.winning_set == std::vector<std::size_t>{1});
  CHECK(plan.best_reward[0] == plan.best_reward[1]);
  CHECK(plan.action_posterior[1] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("softmax is invariant to a constant shift of G") {
  Rng rng(12);
  for (int k = 0; k < 50; ++k) {
    std::vector<SequenceScore> a;
    std::vector<SequenceScore> b;
    for (const auto& seq : enumerate_sequences(3, 2, {}, 1e6)) {
      const double g = rng.uniform() * 5;
      a.push_back({seq, EfeScore{EfeScore::Kind::Finite, g, 0, 0}});
      b.push_back({seq, EfeScore{EfeScore::Kind::Finite, g + 123.25, 0, 0}});
    }
    const auto pa = select_first_action(a, 3, {}, false).action_posterior;
    const auto pb = select_first_action(b, 3, {}, false).action_posterior;
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(pa[i] - pb[i]) <= 1e-12);
  }
}

TEST_CASE("sequence-level limit winners maximize reward, then entropy") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    RandomSpec spec = testing::sized_spec(seed, 4, 3, 3, 2);
    spec.reward_ties = seed % 2 == 0;
    const FiniteMdp mdp = gen_random_mdp(spec);
    const StandardPlan plan = standard_plan(mdp, build_preferences(mdp.reward(), ZeroTemperature{}), 0, 0);
    std::vector<EfeScore> scores;
    for (const auto& s : plan.per_sequence) scores.push_back(s.score);
    const auto winners = argmin_set(scores, {}, 1e-9);

    std::vector<oracle::PathTerms> ref;
    for (const auto& s : plan.per_sequence) ref.push_back(oracle::enumerate_efe(mdp, s.actions, 0, {}));
    double top = -INFINITY;
    for (const auto& r : ref) top = std::max(top, r.expected_reward);
    double h = -INFINITY;
    for (const auto& r : ref)
      if (r.expected_reward >= top - 1e-9) h = std::max(h, r.entropy);
    for (std::size_t i : winners) {
      CHECK(ref[i].expected_reward >= top - 1e-9);
      CHECK(ref[i].entropy >= h - 1e-9);
    }
  }
}

TEST_CASE("masked first actions get no mass") {
  RawModel raw = to_raw(gen_random_mdp(testing::spec(4, 3, 3, 2)));
  raw.action_mask = std::vector<std::vector<bool>>{{false, true, false}, {true, true, true}, {true, false, true}};
  const FiniteMdp mdp = validate_mdp(raw);
  for (const PreferenceMode mode : {PreferenceMode{Beta{2.0}}, PreferenceMode{ZeroTemperature{}}}) {
    const Preferences p = build_preferences(mdp.reward(), mode);
    const StandardPlan at0 = standard_plan(mdp, p, 0, 0);
    CHECK(at0.chosen == 1);
    CHECK(at0.action_posterior[0] == 0.0);
    CHECK(at0.action_posterior[2] == 0.0);
    CHECK(at0.per_sequence.size() == 3);
    const StandardPlan at2 = standard_plan(mdp, p, 2, 1);
    CHECK(at2.action_posterior[1] == 0.0);
  }
}

TEST_CASE("mean-field mode and pruning") {
  RandomSpec spec = testing::spec(6, 3, 3, 3);
  spec.deterministic = true;
  const FiniteMdp det = gen_random_mdp(spec);
  const Preferences p = build_preferences(det.reward(), Beta{3.0});
  StandardOptions mf;
  mf.efe = EfeMode::MeanField;
  const StandardPlan exact = standard_plan(det, p, 0, 0);
  const StandardPlan approx = standard_plan(det, p, 0, 0, mf);
  for (std::size_t a = 0; a < 3; ++a) CHECK(std::abs(exact.action_posterior[a] - approx.action_posterior[a]) <= 1e-12);

  const FiniteMdp mdp = gen_random_mdp(testing::spec(7, 4, 3, 4));
  const Preferences q = build_preferences(mdp.reward(), Beta{2.0});
  const StandardPlan full = standard_plan(mdp, q, 0, 0, mf);
  StandardOptions wide = mf;
  wide.prune = 1e6;
  const StandardPlan unpruned = standard_plan(mdp, q, 0, 0, wide);
  CHECK(unpruned.action_posterior == full.action_posterior);

  StandardOptions tight = mf;
  tight.prune = 0.0;
  const StandardPlan pruned = standard_plan(mdp, q, 0, 0, tight);
  std::size_t n_pruned = 0;
  for (std::size_t i = 0; i < pruned.per_sequence.size(); ++i) {
    if (pruned.per_sequence[i].score.is_pruned()) {
      ++n_pruned;
      continue;
    }
    CHECK(pruned.per_sequence[i].score.g == full.per_sequence[i].score.g);
  }
  CHECK(n_pruned > 0);
  // The best sequence always survives its own window.
  double best = INFINITY;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < full.per_sequence.size(); ++i)
    if (full.per_sequence[i].score.g < best) best = full.per_sequence[i].score.g, best_i = i;
  CHECK_FALSE(pruned.per_sequence[best_i].score.is_pruned());
  CHECK(standard_plan(mdp, q, 0, 0, tight).action_posterior == pruned.action_posterior);
}

TEST_CASE("serial and parallel plans are bitwise identical") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const FiniteMdp mdp = gen_random_mdp(testing::spec(seed, 4, 3, 5));
    for (const PreferenceMode mode : {PreferenceMode{Beta{1.5}}, PreferenceMode{ZeroTemperature{}}}) {
      const Preferences p = build_preferences(mdp.reward(), mode);
      StandardOptions serial;
      serial.exec = Exec::Serial;
      const StandardPlan a = standard_plan(mdp, p, 1, 0, serial);
      const StandardPlan b = standard_plan(mdp, p, 1, 0);
      CHECK(a.action_posterior == b.action_posterior);
      CHECK(a.log_weight == b.log_weight);
      CHECK(a.chosen == b.chosen);
    }
  }
}

TEST_CASE("argument checks") {
  const FiniteMdp mdp = gen_random_mdp(testing::spec(1, 3, 4, 12));
  const Preferences p = build_preferences(mdp.reward(), Beta{1.0});
  CHECK(error_kind([&] { standard_plan(mdp, p, 0, 0); }) == ErrorKind::TooLarge);
  CHECK(error_kind([&] { standard_plan(mdp, p, 0, 12); }) == ErrorKind::OutOfRange);
  CHECK(error_kind([&] { standard_plan(mdp, p, 3, 11); }) == ErrorKind::OutOfRange);
}

}  // TEST_SUITE
