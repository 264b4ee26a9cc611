#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "efe/model.hpp"
#include "efe/pomdp.hpp"

namespace efe {

/// Dense [obs][state] matrix, shared by Dirichlet parameters and raw counts.
struct ObsStateMatrix {
  std::size_t n_obs = 0;
  std::size_t n_states = 0;
  std::vector<double> values;  // values[o * n_states + s]

  ObsStateMatrix() = default;
  ObsStateMatrix(std::size_t obs, std::size_t states, double fill = 0.0)
      : n_obs(obs), n_states(states), values(obs * states, fill) {}

  double& operator()(std::size_t o, std::size_t s) { return values[o * n_states + s]; }
  double operator()(std::size_t o, std::size_t s) const { return values[o * n_states + s]; }
  double column_sum(std::size_t s) const;
  double total() const;

  bool operator==(const ObsStateMatrix&) const = default;
};

/// Dirichlet concentration parameters over each likelihood column.
struct DirichletPrior {
  ObsStateMatrix a;

  static DirichletPrior uniform(std::size_t n_obs, std::size_t n_states, double concentration);
};

/// Throws NotADistribution on negative entries and ZeroColumn on a column
/// without positive mass.
void validate_prior(const DirichletPrior& prior);

/// a += sum_tau onehot(o_tau) (x) Q(s_tau | o_{0:T}).
DirichletPrior dirichlet_update(const DirichletPrior& prior, std::span<const std::size_t> observations,
                                std::span<const BeliefState> posteriors);

/// Same increments applied to a plain count matrix.
ObsStateMatrix count_update(const ObsStateMatrix& counts, std::span<const std::size_t> observations,
                            std::span<const BeliefState> posteriors);

/// Column-normalized matrix as a likelihood indexed [state][obs].
std::vector<std::vector<double>> normalize_columns(const ObsStateMatrix& m);

/// Dirichlet mean P(o | s) = a[o][s] / sum_o a[o][s], indexed [state][obs].
std::vector<std::vector<double>> expected_likelihood(const DirichletPrior& prior);

/// Total-variation distance per state between two [state][obs] likelihoods.
std::vector<double> column_tv(const std::vector<std::vector<double>>& estimate, const FinitePomdp& truth);

double median(std::vector<double> values);

struct LearningMetrics {
  std::size_t episode = 0;
  double tv_median = 0.0;
  double tv_max = 0.0;
  double mean_column_entropy = 0.0;
  double min_column_mass = 0.0;  // observations accumulated in the least visited column
};

struct LearningOptions {
  double prior_concentration = 1.0;
  std::size_t episodes = 1000;
  std::uint64_t seed = 0;
};

struct LearningResult {
  DirichletPrior prior;
  std::vector<LearningMetrics> metrics;  // at episodes 1, 2, 4, ... and the last one
};

/// Samples episodes from the true model under uniformly random admissible
/// actions, infers exact smoothed posteriors and accumulates them per episode.
LearningResult run_learning(const FinitePomdp& truth, const LearningOptions& options);

LearningMetrics learning_metrics(const DirichletPrior& prior, const DirichletPrior& initial, const FinitePomdp& truth,
                                 std::size_t episode);

/// Versioned CSV: episode, tv_distance_to_truth, mean_column_entropy.
std::string metrics_csv(const std::vector<LearningMetrics>& metrics);

}  // namespace efe
