#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "efe/efe.hpp"
#include "efe/kernels.hpp"
#include "efe/model.hpp"
#include "efe/preferences.hpp"
#include "efe/standard.hpp"

namespace efe {

struct BeliefState {
  std::vector<double> dist;
  std::size_t time = 0;
};

/// Exact state inference given a_{0:t-1} and o_{0:t}.
struct PosteriorBundle {
  std::vector<BeliefState> filtered;  // Q(s_tau | o_{0:tau})
  std::vector<BeliefState> smoothed;  // Q(s_tau | o_{0:t})
  double log_evidence = 0.0;          // log P(o_{0:t} | a_{0:t-1})

  const BeliefState& current() const { return smoothed.back(); }
};

/// Forward-backward smoothing. Throws ImpossibleObservation when the
/// observations have zero probability under every trajectory.
PosteriorBundle exact_posterior(const FinitePomdp& pomdp, std::span<const std::size_t> actions,
                                std::span<const std::size_t> observations);

/// sum_s P(s' | s, a) b(s).
std::vector<double> predict_belief(const FiniteMdp& mdp, std::span<const double> belief, std::size_t action);

/// b'(s') proportional to P(o | s') sum_s P(s' | s, a) b(s).
BeliefState belief_update(const FinitePomdp& pomdp, const BeliefState& belief, std::size_t action, std::size_t obs);

/// P(o | b, a) for every observation.
std::vector<double> observation_predictive(const FinitePomdp& pomdp, std::span<const double> predicted);

/// Exact posterior over whole state trajectories s_{0:t} (s_0 most
/// significant digit), by enumeration.
TrajectoryDist trajectory_posterior(const FinitePomdp& pomdp, std::span<const std::size_t> actions,
                                    std::span<const std::size_t> observations, double guard = kTrajectoryGuard);

/// log P(o_{0:t}, s_{0:t} | a) for one trajectory; -inf if impossible.
double log_joint(const FinitePomdp& pomdp, std::span<const std::size_t> actions,
                 std::span<const std::size_t> observations, std::span<const std::size_t> states);

/// F[q] = E_q[log q - log P(o, s | a)] for a candidate q over s_{0:t}.
double variational_free_energy(const FinitePomdp& pomdp, const TrajectoryDist& q, std::span<const std::size_t> actions,
                               std::span<const std::size_t> observations, double guard = kTrajectoryGuard);

/// Expected free energy split into its two parts.
///
/// In finite mode score.g = risk + ambiguity; in the limit residual already
/// includes ambiguity and risk is NaN.
struct PomdpEfe {
  EfeScore score;
  double risk = 0.0;
  double ambiguity = 0.0;
};

/// sum_tau E_{Q(s_tau)} H[P(o | s_tau)] over the future marginals.
double ambiguity(const FinitePomdp& pomdp, const std::vector<std::vector<double>>& marginals);

PomdpEfe efe_pomdp(const FinitePomdp& pomdp, const Preferences& prefs, std::span<const std::size_t> actions,
                   std::span<const double> belief, double guard = kTrajectoryGuard);
PomdpEfe efe_pomdp(const FinitePomdp& pomdp, const Preferences& prefs, std::span<const std::size_t> actions,
                   const PosteriorBundle& posterior, double guard = kTrajectoryGuard);

/// Risk from per-time marginals instead of the joint.
PomdpEfe efe_pomdp_mean_field(const FinitePomdp& pomdp, const Preferences& prefs, std::span<const std::size_t> actions,
                              std::span<const double> belief, std::optional<PruneWindow> prune = std::nullopt);

/// Actions allowed in every state the belief supports (all actions if that
/// intersection is empty).
std::vector<bool> belief_action_mask(const FiniteMdp& mdp, std::span<const double> belief);

/// Standard scheme over the exact posterior at t = actions.size().
StandardPlan standard_plan_pomdp(const FinitePomdp& pomdp, const Preferences& prefs,
                                 std::span<const std::size_t> observations, std::span<const std::size_t> actions,
                                 const StandardOptions& options = {});

struct BeliefTreeNode {
  std::size_t id = 0;
  std::optional<std::size_t> parent;
  std::optional<std::size_t> via_action;
  std::optional<std::size_t> via_obs;
  double obs_probability = 1.0;
  std::size_t time = 0;
  std::vector<double> belief;
  std::vector<EfeScore> scores;
  std::vector<std::size_t> argmin;
};

struct PomdpSophisticatedPlan {
  std::size_t chosen = 0;
  std::vector<std::size_t> argmin;
  std::vector<EfeScore> root_scores;
  std::vector<BeliefTreeNode> tree;  // filled when requested; node 0 is the root
};

/// Recursive scheme over beliefs: branches over observations weighted by
/// P(o | b, a), continuations averaged over argmin sets. Throws TooLarge when
/// (|A| |O|)^(T-t) |S| exceeds `tree_guard`.
PomdpSophisticatedPlan sophisticated_plan_pomdp(const FinitePomdp& pomdp, const Preferences& prefs,
                                                const BeliefState& belief, double tree_guard = 1e7,
                                                Exec exec = Exec::Parallel, bool record_tree = false);

}  // namespace efe
