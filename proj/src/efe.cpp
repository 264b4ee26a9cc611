#include "efe/efe.hpp"

#include <cmath>
#include <limits>

#include "efe/error.hpp"

namespace efe {

namespace {

void check_actions(const FiniteMdp& mdp, std::span<const std::size_t> actions) {
  require(!actions.empty() && actions.size() <= mdp.horizon(), ErrorKind::LengthMismatch,
          "action sequence length must be in [1, T]");
  for (std::size_t a : actions) require(a < mdp.n_actions(), ErrorKind::OutOfRange, "action index out of range");
}

std::vector<double> dirac(std::size_t n, std::size_t at) {
  std::vector<double> out(n, 0.0);
  out[at] = 1.0;
  return out;
}

}  // namespace

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

double kl_to_log(std::span<const double> probs, std::span<const double> log_c) {
  double kl = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    if (log_c[i] == -std::numeric_limits<double>::infinity()) return std::numeric_limits<double>::infinity();
    kl += probs[i] * (std::log(probs[i]) - log_c[i]);
  }
  return kl;
}

void TrajectoryDist::decode(std::size_t index, std::span<std::size_t> out) const {
  for (std::size_t k = length; k-- > 0;) {
    out[k] = index % n_states;
    index /= n_states;
  }
}

TrajectoryDist predictive_joint(const FiniteMdp& mdp, std::span<const std::size_t> actions,
                                std::span<const double> belief, double guard) {
  check_actions(mdp, actions);
  const std::size_t S = mdp.n_states();
  require(belief.size() == S, ErrorKind::DimensionMismatch, "belief has wrong dimension");
  const double size = std::pow(static_cast<double>(S), static_cast<double>(actions.size()));
  require(size <= guard, ErrorKind::TooLarge,
          "joint over " + std::to_string(size) + " trajectories exceeds guard " + std::to_string(guard));

  TrajectoryDist joint{S, actions.size(), std::vector<double>(S, 0.0)};
  for (std::size_t s = 0; s < S; ++s) {
    if (belief[s] == 0.0) continue;
    const auto row = mdp.row(actions[0], s);
    for (std::size_t next = 0; next < S; ++next) joint.probs[next] += belief[s] * row[next];
  }
  for (std::size_t k = 1; k < actions.size(); ++k) {
    std::vector<double> longer(joint.probs.size() * S, 0.0);
    for (std::size_t i = 0; i < joint.probs.size(); ++i) {
      if (joint.probs[i] == 0.0) continue;
      const auto row = mdp.row(actions[k], i % S);
      for (std::size_t next = 0; next < S; ++next) longer[i * S + next] = joint.probs[i] * row[next];
    }
    joint.probs = std::move(longer);
  }
  return joint;
}

TrajectoryDist predictive_dist(const FiniteMdp& mdp, std::span<const std::size_t> actions, std::size_t state,
                               double guard) {
  require(state < mdp.n_states(), ErrorKind::OutOfRange, "state index out of range");
  return predictive_joint(mdp, actions, dirac(mdp.n_states(), state), guard);
}

std::vector<std::vector<double>> predictive_marginals(const FiniteMdp& mdp, std::span<const std::size_t> actions,
                                                      std::span<const double> belief) {
  check_actions(mdp, actions);
  const std::size_t S = mdp.n_states();
  require(belief.size() == S, ErrorKind::DimensionMismatch, "belief has wrong dimension");
  std::vector<std::vector<double>> out;
  std::vector<double> current(belief.begin(), belief.end());
  for (std::size_t a : actions) {
    std::vector<double> next(S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      if (current[s] == 0.0) continue;
      const auto row = mdp.row(a, s);
      for (std::size_t n = 0; n < S; ++n) next[n] += current[s] * row[n];
    }
    out.push_back(next);
    current = std::move(next);
  }
  return out;
}

EfeScore score_joint(const Preferences& prefs, const TrajectoryDist& joint) {
  EfeScore score;
  score.kind = prefs.is_limit() ? EfeScore::Kind::Limit : EfeScore::Kind::Finite;
  std::vector<std::size_t> path(joint.length);
  double g = 0.0;
  double reward = 0.0;
  double neg_entropy = 0.0;
  bool infinite = false;
  for (std::size_t i = 0; i < joint.probs.size(); ++i) {
    const double q = joint.probs[i];
    if (q <= 0.0) continue;
    joint.decode(i, path);
    double r = 0.0;
    double log_c = 0.0;
    for (std::size_t s : path) {
      r += prefs.reward(s);
      if (!prefs.is_limit()) log_c += prefs.log_c(s);
    }
    const double log_q = std::log(q);
    reward += q * r;
    neg_entropy += q * log_q;
    if (!prefs.is_limit()) {
      if (log_c == -std::numeric_limits<double>::infinity()) infinite = true;
      g += q * (log_q - log_c);
    }
  }
  score.expected_reward = reward;
  score.residual = neg_entropy;
  if (prefs.is_limit()) {
    score.g = std::numeric_limits<double>::quiet_NaN();
  } else {
    score.g = infinite ? std::numeric_limits<double>::infinity() : g;
  }
  return score;
}

EfeScore efe_exact(const FiniteMdp& mdp, const Preferences& prefs, std::span<const std::size_t> actions,
                   std::size_t state, double guard) {
  require(prefs.reward().size() == mdp.n_states(), ErrorKind::DimensionMismatch, "preferences do not match model");
  return score_joint(prefs, predictive_dist(mdp, actions, state, guard));
}

EfeScore efe_mean_field_from_belief(const FiniteMdp& mdp, const Preferences& prefs,
                                    std::span<const std::size_t> actions, std::span<const double> belief,
                                    std::optional<PruneWindow> prune) {
  require(prefs.reward().size() == mdp.n_states(), ErrorKind::DimensionMismatch, "preferences do not match model");
  const auto marginals = predictive_marginals(mdp, actions, belief);
  EfeScore score;
  score.kind = prefs.is_limit() ? EfeScore::Kind::Limit : EfeScore::Kind::Finite;
  const bool window = prune && !prefs.is_limit() && std::isfinite(prune->best_seen);
  double g = 0.0;
  for (const auto& m : marginals) {
    score.residual -= entropy(m);
    for (std::size_t s = 0; s < m.size(); ++s) score.expected_reward += m[s] * prefs.reward(s);
    if (!prefs.is_limit()) {
      g += kl_to_log(m, prefs.log_c());
      if (window && g > prune->best_seen + prune->threshold) return EfeScore::pruned();
    }
  }
  score.g = prefs.is_limit() ? std::numeric_limits<double>::quiet_NaN() : g;
  return score;
}

EfeScore efe_mean_field(const FiniteMdp& mdp, const Preferences& prefs, std::span<const std::size_t> actions,
                        std::size_t state, std::optional<PruneWindow> prune) {
  require(state < mdp.n_states(), ErrorKind::OutOfRange, "state index out of range");
  return efe_mean_field_from_belief(mdp, prefs, actions, dirac(mdp.n_states(), state), prune);
}

}  // namespace efe
