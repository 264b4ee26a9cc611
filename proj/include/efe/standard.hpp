#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "efe/efe.hpp"
#include "efe/kernels.hpp"
#include "efe/model.hpp"
#include "efe/preferences.hpp"

namespace efe {

enum class EfeMode { Exact, MeanField };

/// Enumeration caps shared by the planners.
struct PlanGuards {
  double sequences = 1e6;     // |A|^(T-t)
  double trajectories = kTrajectoryGuard;  // |S|^(T-t)
  double tree = 1e7;          // (|A| |O|)^(T-t) |S|
};

struct StandardOptions {
  EfeMode efe = EfeMode::Exact;
  std::optional<double> prune;  // mean-field Occam window threshold
  PlanGuards guards;
  Exec exec = Exec::Parallel;
};

struct SequenceScore {
  ActionSequence actions;
  EfeScore score;
};

/// Output of the sequence-softmax scheme.
struct StandardPlan {
  std::vector<double> action_posterior;
  std::size_t chosen = 0;
  std::vector<std::size_t> winning_set;
  /// Finite mode: log sum exp(-G) over sequences starting with each action.
  /// Limit mode: log sum exp(-residual) over the reward-maximizing sequences
  /// starting with each action. -inf where there is no candidate.
  std::vector<double> log_weight;
  /// Limit mode: max expected reward over sequences starting with each action.
  std::vector<double> best_reward;
  std::vector<SequenceScore> per_sequence;  // lexicographic order
};

/// All sequences of the given length in lexicographic order, with the first
/// action restricted to `first_allowed` (empty = all).
std::vector<ActionSequence> enumerate_sequences(std::size_t n_actions, std::size_t length,
                                                const std::vector<bool>& first_allowed, double guard);

/// Marginalizes sequence scores onto the first action. Finite mode takes the
/// softmax of -G; limit mode takes its beta -> infinity limit.
StandardPlan select_first_action(std::vector<SequenceScore> scores, std::size_t n_actions,
                                 const std::vector<bool>& first_allowed, bool limit);

using SequenceScorer = std::function<EfeScore(const ActionSequence&, std::optional<PruneWindow>)>;

/// Scores every sequence (in parallel unless pruning is on, which needs the
/// running best in lexicographic order) and selects the first action.
StandardPlan plan_over_sequences(std::size_t n_actions, std::size_t length, const std::vector<bool>& first_allowed,
                                 const SequenceScorer& scorer, const StandardOptions& options, bool limit);

StandardPlan standard_plan(const FiniteMdp& mdp, const Preferences& prefs, std::size_t state, std::size_t time,
                           const StandardOptions& options = {});

double log_sum_exp(std::span<const double> xs);

}  // namespace efe
