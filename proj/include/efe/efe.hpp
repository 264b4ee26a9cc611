#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "efe/model.hpp"
#include "efe/preferences.hpp"

namespace efe {

/// Default cap on |S|^(T-t) for exact joint distributions over trajectories.
inline constexpr double kTrajectoryGuard = 1e7;

/// Exact joint Q(s_{t+1:T} | a, .) over future trajectories.
///
/// Entries are in lexicographic order with s_{t+1} as the most significant
/// digit: index = sum_k s_{t+1+k} * S^(L-1-k).
struct TrajectoryDist {
  std::size_t n_states = 0;
  std::size_t length = 0;
  std::vector<double> probs;

  /// Writes the state sequence of trajectory `index` into `out` (size length).
  void decode(std::size_t index, std::span<std::size_t> out) const;
};

/// Joint over trajectories from a known current state.
TrajectoryDist predictive_dist(const FiniteMdp& mdp, std::span<const std::size_t> actions, std::size_t state,
                               double guard = kTrajectoryGuard);

/// Joint over trajectories when the current state is only known through a
/// belief over states.
TrajectoryDist predictive_joint(const FiniteMdp& mdp, std::span<const std::size_t> actions,
                                std::span<const double> belief, double guard = kTrajectoryGuard);

/// Per-time marginals Q(s_tau | a, .) for tau = t+1..T by matrix pushforward.
std::vector<std::vector<double>> predictive_marginals(const FiniteMdp& mdp, std::span<const std::size_t> actions,
                                                      std::span<const double> belief);

/// Scores a joint against the preferences: KL[Q || C_beta] in finite mode,
/// plus E_Q[R] and -H[Q] in both modes. 0 log 0 := 0.
EfeScore score_joint(const Preferences& prefs, const TrajectoryDist& joint);

EfeScore efe_exact(const FiniteMdp& mdp, const Preferences& prefs, std::span<const std::size_t> actions,
                   std::size_t state, double guard = kTrajectoryGuard);

/// Occam window for the mean-field objective: abandon a candidate once its
/// running sum exceeds best_seen + threshold. Inactive while best_seen is not
/// finite.
struct PruneWindow {
  double threshold = 0.0;
  double best_seen = -std::numeric_limits<double>::infinity();
};

/// Sum of per-time marginal KL divergences.
EfeScore efe_mean_field_from_belief(const FiniteMdp& mdp, const Preferences& prefs,
                                    std::span<const std::size_t> actions, std::span<const double> belief,
                                    std::optional<PruneWindow> prune = std::nullopt);

EfeScore efe_mean_field(const FiniteMdp& mdp, const Preferences& prefs, std::span<const std::size_t> actions,
                        std::size_t state, std::optional<PruneWindow> prune = std::nullopt);

/// Shannon entropy (nats) with 0 log 0 := 0.
double entropy(std::span<const double> probs);

/// sum_i p_i (log p_i - log_c_i), +inf if p puts mass where log_c is -inf.
double kl_to_log(std::span<const double> probs, std::span<const double> log_c);

}  // namespace efe
