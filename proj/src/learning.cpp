#include "efe/learning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "efe/efe.hpp"
#include "efe/error.hpp"
#include "efe/rng.hpp"

namespace efe {

double ObsStateMatrix::column_sum(std::size_t s) const {
  double total = 0.0;
  for (std::size_t o = 0; o < n_obs; ++o) total += (*this)(o, s);
  return total;
}

double ObsStateMatrix::total() const {
  double t = 0.0;
  for (double v : values) t += v;
  return t;
}

DirichletPrior DirichletPrior::uniform(std::size_t n_obs, std::size_t n_states, double concentration) {
  require(concentration > 0.0 && std::isfinite(concentration), ErrorKind::OutOfRange,
          "prior concentration must be positive");
  return {ObsStateMatrix(n_obs, n_states, concentration)};
}

void validate_prior(const DirichletPrior& prior) {
  const auto& a = prior.a;
  require(a.values.size() == a.n_obs * a.n_states && a.n_obs > 0 && a.n_states > 0, ErrorKind::DimensionMismatch,
          "prior shape is inconsistent");
  for (double v : a.values)
    require(v >= 0.0 && std::isfinite(v), ErrorKind::NotADistribution, "prior entries must be finite and >= 0");
  for (std::size_t s = 0; s < a.n_states; ++s)
    require(a.column_sum(s) > 0.0, ErrorKind::ZeroColumn, "prior column " + std::to_string(s) + " has no mass");
}

namespace {

void accumulate(ObsStateMatrix& m, std::span<const std::size_t> observations, std::span<const BeliefState> posteriors) {
  require(observations.size() == posteriors.size(), ErrorKind::LengthMismatch,
          "one posterior per observation expected");
  for (std::size_t tau = 0; tau < observations.size(); ++tau) {
    const std::size_t o = observations[tau];
    require(o < m.n_obs, ErrorKind::OutOfRange, "observation index out of range");
    require(posteriors[tau].dist.size() == m.n_states, ErrorKind::DimensionMismatch, "posterior has wrong dimension");
    check_distribution(posteriors[tau].dist, kInputTolerance, "state posterior");
    for (std::size_t s = 0; s < m.n_states; ++s) m(o, s) += posteriors[tau].dist[s];
  }
}

}  // namespace

DirichletPrior dirichlet_update(const DirichletPrior& prior, std::span<const std::size_t> observations,
                                std::span<const BeliefState> posteriors) {
  DirichletPrior out = prior;
  accumulate(out.a, observations, posteriors);
  return out;
}

ObsStateMatrix count_update(const ObsStateMatrix& counts, std::span<const std::size_t> observations,
                            std::span<const BeliefState> posteriors) {
  ObsStateMatrix out = counts;
  accumulate(out, observations, posteriors);
  return out;
}

std::vector<std::vector<double>> normalize_columns(const ObsStateMatrix& m) {
  std::vector<std::vector<double>> out(m.n_states, std::vector<double>(m.n_obs));
  for (std::size_t s = 0; s < m.n_states; ++s) {
    const double total = m.column_sum(s);
    require(total > 0.0, ErrorKind::ZeroColumn, "column " + std::to_string(s) + " has no mass");
    for (std::size_t o = 0; o < m.n_obs; ++o) out[s][o] = m(o, s) / total;
  }
  return out;
}

std::vector<std::vector<double>> expected_likelihood(const DirichletPrior& prior) { return normalize_columns(prior.a); }

std::vector<double> column_tv(const std::vector<std::vector<double>>& estimate, const FinitePomdp& truth) {
  require(estimate.size() == truth.n_states(), ErrorKind::DimensionMismatch, "estimate has wrong state count");
  std::vector<double> out(truth.n_states());
  for (std::size_t s = 0; s < truth.n_states(); ++s) {
    require(estimate[s].size() == truth.n_obs(), ErrorKind::DimensionMismatch, "estimate has wrong obs count");
    double d = 0.0;
    for (std::size_t o = 0; o < truth.n_obs(); ++o) d += std::abs(estimate[s][o] - truth.likelihood(s, o));
    out[s] = 0.5 * d;
  }
  return out;
}

double median(std::vector<double> values) {
  require(!values.empty(), ErrorKind::OutOfRange, "median of nothing");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

LearningMetrics learning_metrics(const DirichletPrior& prior, const DirichletPrior& initial, const FinitePomdp& truth,
                                 std::size_t episode) {
  const auto estimate = expected_likelihood(prior);
  const auto tv = column_tv(estimate, truth);
  LearningMetrics m;
  m.episode = episode;
  m.tv_median = median(tv);
  m.tv_max = *std::max_element(tv.begin(), tv.end());
  for (const auto& col : estimate) m.mean_column_entropy += entropy(col);
  m.mean_column_entropy /= static_cast<double>(estimate.size());
  m.min_column_mass = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < truth.n_states(); ++s)
    m.min_column_mass = std::min(m.min_column_mass, prior.a.column_sum(s) - initial.a.column_sum(s));
  return m;
}

LearningResult run_learning(const FinitePomdp& truth, const LearningOptions& options) {
  require(options.episodes >= 1, ErrorKind::OutOfRange, "need at least one episode");
  LearningResult result;
  const DirichletPrior initial = DirichletPrior::uniform(truth.n_obs(), truth.n_states(), options.prior_concentration);
  result.prior = initial;
  std::size_t next_checkpoint = 1;
  for (std::size_t ep = 1; ep <= options.episodes; ++ep) {
    Rng policy_rng(mix_seed(options.seed, 2 * ep + 1));
    const PomdpAgent agent = [&](std::size_t, std::span<const std::size_t> obs, std::span<const std::size_t> acts) {
      if (!truth.mdp().has_mask()) return policy_rng.index(truth.n_actions());
      const PosteriorBundle post = exact_posterior(truth, acts, obs);
      const std::vector<bool> mask = belief_action_mask(truth.mdp(), post.current().dist);
      std::vector<std::size_t> allowed;
      for (std::size_t a = 0; a < mask.size(); ++a)
        if (mask[a]) allowed.push_back(a);
      return allowed[policy_rng.index(allowed.size())];
    };
    const Episode episode = rollout(truth, agent, mix_seed(options.seed, 2 * ep));
    const PosteriorBundle post = exact_posterior(truth, episode.actions, *episode.observations);
    result.prior = dirichlet_update(result.prior, *episode.observations, post.smoothed);
    if (ep == next_checkpoint || ep == options.episodes) {
      result.metrics.push_back(learning_metrics(result.prior, initial, truth, ep));
      if (ep == next_checkpoint) next_checkpoint *= 2;
    }
  }
  return result;
}

std::string metrics_csv(const std::vector<LearningMetrics>& metrics) {
  std::string out = "# efe-planner learning metrics v1\nepisode,tv_distance_to_truth,mean_column_entropy\n";
  char line[128];
  for (const auto& m : metrics) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g\n", m.episode, m.tv_median, m.mean_column_entropy);
    out += line;
  }
  return out;
}

}  // namespace efe
