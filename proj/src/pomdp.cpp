#include "efe/pomdp.hpp"

#include <cmath>
#include <limits>

#include "efe/dp.hpp"
#include "efe/error.hpp"
#include "efe/sophisticated.hpp"

namespace efe {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_history(const FinitePomdp& pomdp, std::span<const std::size_t> actions,
                   std::span<const std::size_t> observations) {
  require(observations.size() == actions.size() + 1, ErrorKind::LengthMismatch,
          "need one more observation than actions");
  require(observations.size() <= pomdp.horizon() + 1, ErrorKind::LengthMismatch, "history longer than horizon");
  for (std::size_t a : actions) require(a < pomdp.n_actions(), ErrorKind::OutOfRange, "action index out of range");
  for (std::size_t o : observations) require(o < pomdp.n_obs(), ErrorKind::OutOfRange, "observation index out of range");
}

double normalize(std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  if (total > 0.0)
    for (double& x : v) x /= total;
  return total;
}

}  // namespace

std::vector<double> predict_belief(const FiniteMdp& mdp, std::span<const double> belief, std::size_t action) {
  const std::size_t S = mdp.n_states();
  std::vector<double> next(S, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    if (belief[s] == 0.0) continue;
    const auto row = mdp.row(action, s);
    for (std::size_t n = 0; n < S; ++n) next[n] += belief[s] * row[n];
  }
  return next;
}

std::vector<double> observation_predictive(const FinitePomdp& pomdp, std::span<const double> predicted) {
  std::vector<double> out(pomdp.n_obs(), 0.0);
  for (std::size_t s = 0; s < pomdp.n_states(); ++s) {
    if (predicted[s] == 0.0) continue;
    for (std::size_t o = 0; o < pomdp.n_obs(); ++o) out[o] += predicted[s] * pomdp.likelihood(s, o);
  }
  return out;
}

BeliefState belief_update(const FinitePomdp& pomdp, const BeliefState& belief, std::size_t action, std::size_t obs) {
  require(belief.dist.size() == pomdp.n_states(), ErrorKind::DimensionMismatch, "belief has wrong dimension");
  require(action < pomdp.n_actions() && obs < pomdp.n_obs(), ErrorKind::OutOfRange, "index out of range");
  std::vector<double> next = predict_belief(pomdp.mdp(), belief.dist, action);
  for (std::size_t s = 0; s < next.size(); ++s) next[s] *= pomdp.likelihood(s, obs);
  require(normalize(next) > 0.0, ErrorKind::ImpossibleObservation,
          "observation " + std::to_string(obs) + " has zero probability");
  return {std::move(next), belief.time + 1};
}

PosteriorBundle exact_posterior(const FinitePomdp& pomdp, std::span<const std::size_t> actions,
                                std::span<const std::size_t> observations) {
  check_history(pomdp, actions, observations);
  const std::size_t S = pomdp.n_states();
  const std::size_t n = observations.size();
  PosteriorBundle out;
  std::vector<double> scale(n);

  std::vector<double> alpha(pomdp.mdp().initial().begin(), pomdp.mdp().initial().end());
  for (std::size_t tau = 0; tau < n; ++tau) {
    if (tau > 0) alpha = predict_belief(pomdp.mdp(), alpha, actions[tau - 1]);
    for (std::size_t s = 0; s < S; ++s) alpha[s] *= pomdp.likelihood(s, observations[tau]);
    scale[tau] = normalize(alpha);
    require(scale[tau] > 0.0, ErrorKind::ImpossibleObservation,
            "observations have zero probability under the model (at time " + std::to_string(tau) + ")");
    out.log_evidence += std::log(scale[tau]);
    out.filtered.push_back({alpha, tau});
  }

  out.smoothed.resize(n);
  out.smoothed[n - 1] = out.filtered[n - 1];
  std::vector<double> beta(S, 1.0);
  for (std::size_t tau = n - 1; tau-- > 0;) {
    std::vector<double> prev(S, 0.0);
    const std::size_t o = observations[tau + 1];
    for (std::size_t s = 0; s < S; ++s) {
      const auto row = pomdp.mdp().row(actions[tau], s);
      double acc = 0.0;
      for (std::size_t next = 0; next < S; ++next) acc += row[next] * pomdp.likelihood(next, o) * beta[next];
      prev[s] = acc / scale[tau + 1];
    }
    beta = std::move(prev);
    std::vector<double> post(S);
    for (std::size_t s = 0; s < S; ++s) post[s] = out.filtered[tau].dist[s] * beta[s];
    normalize(post);
    out.smoothed[tau] = {std::move(post), tau};
  }
  return out;
}

double log_joint(const FinitePomdp& pomdp, std::span<const std::size_t> actions,
                 std::span<const std::size_t> observations, std::span<const std::size_t> states) {
  require(states.size() == observations.size(), ErrorKind::LengthMismatch, "one state per observation expected");
  double total = std::log(pomdp.mdp().initial()[states[0]]);
  for (std::size_t tau = 0; tau < states.size(); ++tau) {
    total += std::log(pomdp.likelihood(states[tau], observations[tau]));
    if (tau > 0) total += std::log(pomdp.mdp().transition(actions[tau - 1], states[tau - 1], states[tau]));
  }
  return total;
}

TrajectoryDist trajectory_posterior(const FinitePomdp& pomdp, std::span<const std::size_t> actions,
                                    std::span<const std::size_t> observations, double guard) {
  check_history(pomdp, actions, observations);
  const std::size_t S = pomdp.n_states();
  const std::size_t n = observations.size();
  const double size = std::pow(static_cast<double>(S), static_cast<double>(n));
  require(size <= guard, ErrorKind::TooLarge, "trajectory posterior exceeds guard");
  TrajectoryDist q{S, n, std::vector<double>(static_cast<std::size_t>(size), 0.0)};
  std::vector<std::size_t> path(n);
  for (std::size_t i = 0; i < q.probs.size(); ++i) {
    q.decode(i, path);
    const double lj = log_joint(pomdp, actions, observations, path);
    q.probs[i] = lj == kNegInf ? 0.0 : std::exp(lj);
  }
  require(normalize(q.probs) > 0.0, ErrorKind::ImpossibleObservation, "observations have zero probability");
  return q;
}

double variational_free_energy(const FinitePomdp& pomdp, const TrajectoryDist& q, std::span<const std::size_t> actions,
                               std::span<const std::size_t> observations, double guard) {
  check_history(pomdp, actions, observations);
  require(q.n_states == pomdp.n_states() && q.length == observations.size(), ErrorKind::DimensionMismatch,
          "candidate does not cover s_0..s_t");
  require(static_cast<double>(q.probs.size()) <= guard, ErrorKind::TooLarge, "candidate exceeds guard");
  check_distribution(q.probs, kInputTolerance, "candidate posterior");
  std::vector<std::size_t> path(q.length);
  double f = 0.0;
  for (std::size_t i = 0; i < q.probs.size(); ++i) {
    if (q.probs[i] <= 0.0) continue;
    q.decode(i, path);
    const double lj = log_joint(pomdp, actions, observations, path);
    if (lj == kNegInf) return std::numeric_limits<double>::infinity();
    f += q.probs[i] * (std::log(q.probs[i]) - lj);
  }
  return f;
}

double ambiguity(const FinitePomdp& pomdp, const std::vector<std::vector<double>>& marginals) {
  double total = 0.0;
  for (const auto& m : marginals)
    for (std::size_t s = 0; s < m.size(); ++s)
      if (m[s] != 0.0) total += m[s] * pomdp.observation_entropy(s);
  return total;
}

PomdpEfe efe_pomdp(const FinitePomdp& pomdp, const Preferences& prefs, std::span<const std::size_t> actions,
                   std::span<const double> belief, double guard) {
  require(prefs.reward().size() == pomdp.n_states(), ErrorKind::DimensionMismatch, "preferences do not match model");
  PomdpEfe out;
  out.score = score_joint(prefs, predictive_joint(pomdp.mdp(), actions, belief, guard));
  out.ambiguity = ambiguity(pomdp, predictive_marginals(pomdp.mdp(), actions, belief));
  out.risk = prefs.is_limit() ? std::numeric_limits<double>::quiet_NaN() : out.score.g;
  out.score.g += out.ambiguity;
  out.score.residual += out.ambiguity;
  return out;
}

PomdpEfe efe_pomdp(const FinitePomdp& pomdp, const Preferences& prefs, std::span<const std::size_t> actions,
                   const PosteriorBundle& posterior, double guard) {
  return efe_pomdp(pomdp, prefs, actions, posterior.current().dist, guard);
}

PomdpEfe efe_pomdp_mean_field(const FinitePomdp& pomdp, const Preferences& prefs, std::span<const std::size_t> actions,
                              std::span<const double> belief, std::optional<PruneWindow> prune) {
  PomdpEfe out;
  out.score = efe_mean_field_from_belief(pomdp.mdp(), prefs, actions, belief, prune);
  if (out.score.is_pruned()) return out;
  out.ambiguity = ambiguity(pomdp, predictive_marginals(pomdp.mdp(), actions, belief));
  out.risk = prefs.is_limit() ? std::numeric_limits<double>::quiet_NaN() : out.score.g;
  out.score.g += out.ambiguity;
  out.score.residual += out.ambiguity;
  return out;
}

std::vector<bool> belief_action_mask(const FiniteMdp& mdp, std::span<const double> belief) {
  std::vector<bool> mask(mdp.n_actions(), true);
  if (!mdp.has_mask()) return mask;
  for (std::size_t s = 0; s < belief.size(); ++s) {
    if (belief[s] == 0.0) continue;
    for (std::size_t a = 0; a < mask.size(); ++a) mask[a] = mask[a] && mdp.allowed(s, a);
  }
  bool any = false;
  for (bool m : mask) any = any || m;
  if (!any) mask.assign(mdp.n_actions(), true);
  return mask;
}

StandardPlan standard_plan_pomdp(const FinitePomdp& pomdp, const Preferences& prefs,
                                 std::span<const std::size_t> observations, std::span<const std::size_t> actions,
                                 const StandardOptions& options) {
  require(actions.size() < pomdp.horizon(), ErrorKind::OutOfRange, "planning time must be < T");
  require(prefs.reward().size() == pomdp.n_states(), ErrorKind::DimensionMismatch, "preferences do not match model");
  const PosteriorBundle posterior = exact_posterior(pomdp, actions, observations);
  const std::vector<double>& belief = posterior.current().dist;
  const std::vector<bool> first_allowed = belief_action_mask(pomdp.mdp(), belief);

  const SequenceScorer scorer = [&](const ActionSequence& seq, std::optional<PruneWindow> window) {
    if (options.efe == EfeMode::MeanField) return efe_pomdp_mean_field(pomdp, prefs, seq, belief, window).score;
    return efe_pomdp(pomdp, prefs, seq, belief, options.guards.trajectories).score;
  };
  return plan_over_sequences(pomdp.n_actions(), pomdp.horizon() - actions.size(), first_allowed, scorer, options,
                             prefs.is_limit());
}

namespace {

struct BeliefTree {
  const FinitePomdp& pomdp;
  const Preferences& prefs;
  std::vector<BeliefTreeNode>* nodes = nullptr;

  // Scores of every action at (belief, tau), plus the argmin set.
  struct Result {
    std::vector<EfeScore> scores;
    std::vector<std::size_t> argmin;
  };

  EfeScore action_score(const std::vector<double>& belief, std::size_t tau, std::size_t a,
                        std::optional<std::size_t> node) {
    const std::vector<double> pred = predict_belief(pomdp.mdp(), belief, a);
    EfeScore score = step_score(prefs, pred);
    double amb = 0.0;
    for (std::size_t s = 0; s < pred.size(); ++s)
      if (pred[s] != 0.0) amb += pred[s] * pomdp.observation_entropy(s);
    score.g += amb;
    score.residual += amb;
    if (tau + 1 >= pomdp.horizon()) return score;

    const std::vector<double> p_obs = observation_predictive(pomdp, pred);
    double g = 0.0;
    double reward = 0.0;
    double residual = 0.0;
    for (std::size_t o = 0; o < p_obs.size(); ++o) {
      if (p_obs[o] == 0.0) continue;
      std::vector<double> next(pred.size());
      for (std::size_t s = 0; s < pred.size(); ++s) next[s] = pred[s] * pomdp.likelihood(s, o) / p_obs[o];
      std::optional<std::size_t> child;
      if (nodes) {
        child = nodes->size();
        nodes->push_back({*child, node, a, o, p_obs[o], tau + 1, next, {}, {}});
      }
      const Result r = solve(next, tau + 1, child);
      EfeScore mean;
      for (std::size_t a2 : r.argmin) {
        mean.g += r.scores[a2].g;
        mean.expected_reward += r.scores[a2].expected_reward;
        mean.residual += r.scores[a2].residual;
      }
      const double k = static_cast<double>(r.argmin.size());
      g += p_obs[o] * (mean.g / k);
      reward += p_obs[o] * (mean.expected_reward / k);
      residual += p_obs[o] * (mean.residual / k);
    }
    score.g += g;
    score.expected_reward += reward;
    score.residual += residual;
    return score;
  }

  Result solve(const std::vector<double>& belief, std::size_t tau, std::optional<std::size_t> node,
               Exec exec = Exec::Serial) {
    Result r;
    r.scores.resize(pomdp.n_actions());
    parallel_for(pomdp.n_actions(), exec, [&](std::size_t a) { r.scores[a] = action_score(belief, tau, a, node); });
    r.argmin = argmin_set(r.scores, belief_action_mask(pomdp.mdp(), belief), kTieTolerance);
    if (nodes && node) {
      (*nodes)[*node].scores = r.scores;
      (*nodes)[*node].argmin = r.argmin;
    }
    return r;
  }
};

}  // namespace

PomdpSophisticatedPlan sophisticated_plan_pomdp(const FinitePomdp& pomdp, const Preferences& prefs,
                                                const BeliefState& belief, double tree_guard, Exec exec,
                                                bool record_tree) {
  require(belief.dist.size() == pomdp.n_states(), ErrorKind::DimensionMismatch, "belief has wrong dimension");
  require(belief.time < pomdp.horizon(), ErrorKind::OutOfRange, "planning time must be < T");
  require(prefs.reward().size() == pomdp.n_states(), ErrorKind::DimensionMismatch, "preferences do not match model");
  check_distribution(belief.dist, kInputTolerance, "belief");
  const double size = std::pow(static_cast<double>(pomdp.n_actions() * pomdp.n_obs()),
                               static_cast<double>(pomdp.horizon() - belief.time)) *
                      static_cast<double>(pomdp.n_states());
  require(size <= tree_guard, ErrorKind::TooLarge,
          "belief tree of size " + std::to_string(size) + " exceeds guard " + std::to_string(tree_guard));

  PomdpSophisticatedPlan plan;
  BeliefTree tree{pomdp, prefs, nullptr};
  std::optional<std::size_t> root;
  if (record_tree) {
    tree.nodes = &plan.tree;
    plan.tree.push_back({0, std::nullopt, std::nullopt, std::nullopt, 1.0, belief.time, belief.dist, {}, {}});
    root = 0;
    exec = Exec::Serial;  // node ids are assigned in visiting order
  }
  auto result = tree.solve(belief.dist, belief.time, root, exec);
  plan.root_scores = std::move(result.scores);
  plan.argmin = std::move(result.argmin);
  plan.chosen = plan.argmin.front();
  return plan;
}

}  // namespace efe
