#pragma once

#include <cstddef>
#include <vector>

#include "efe/dp.hpp"
#include "efe/kernels.hpp"
#include "efe/model.hpp"
#include "efe/preferences.hpp"

namespace efe {

/// Recursive expected free energy G(a | s, tau) for tau = first_time..T-1.
class EfeTable {
 public:
  EfeTable() = default;
  EfeTable(std::size_t first_time, std::size_t horizon, std::size_t n_states, std::size_t n_actions)
      : first_time_(first_time), horizon_(horizon), n_states_(n_states), n_actions_(n_actions),
        scores_((horizon - first_time) * n_states * n_actions),
        argmin_sets_((horizon - first_time) * n_states) {}

  std::size_t first_time() const noexcept { return first_time_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }

  const EfeScore& operator()(std::size_t tau, std::size_t s, std::size_t a) const { return scores_[index(tau, s) * n_actions_ + a]; }
  EfeScore& operator()(std::size_t tau, std::size_t s, std::size_t a) { return scores_[index(tau, s) * n_actions_ + a]; }
  std::span<const EfeScore> scores(std::size_t tau, std::size_t s) const {
    return {scores_.data() + index(tau, s) * n_actions_, n_actions_};
  }
  const std::vector<std::size_t>& argmin(std::size_t tau, std::size_t s) const { return argmin_sets_[index(tau, s)]; }
  std::vector<std::size_t>& argmin(std::size_t tau, std::size_t s) { return argmin_sets_[index(tau, s)]; }
  /// Lowest-index member of the argmin set.
  std::size_t chosen(std::size_t tau, std::size_t s) const { return argmin(tau, s).front(); }

 private:
  std::size_t index(std::size_t tau, std::size_t s) const { return (tau - first_time_) * n_states_ + s; }

  std::size_t first_time_ = 0;
  std::size_t horizon_ = 0;
  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  std::vector<EfeScore> scores_;
  std::vector<std::vector<std::size_t>> argmin_sets_;
};

/// Backward recursion from T-1 down to first_time. Future actions are uniform
/// over each argmin set (ties within tie_tol). The table does not depend on
/// the query time, so one call from 0 covers every (s, t).
EfeTable sophisticated_table(const FiniteMdp& mdp, const Preferences& prefs, std::size_t first_time = 0,
                             Exec exec = Exec::Parallel, double tie_tol = kTieTolerance);

struct SophisticatedPlan {
  std::size_t chosen = 0;
  EfeTable table;
};

SophisticatedPlan sophisticated_plan(const FiniteMdp& mdp, const Preferences& prefs, std::size_t time,
                                     std::size_t state, Exec exec = Exec::Parallel);

/// Test oracle: expands the closed-loop tree of trajectories and argmin-set
/// actions below (state, action) at `time` and returns the path-weighted sum
/// of one-step divergences, rewards and negative entropies. Throws TooLarge
/// when the number of tree paths exceeds `guard`.
EfeScore unroll_efe_check(const FiniteMdp& mdp, const Preferences& prefs, std::size_t time, std::size_t state,
                          std::size_t action, double guard = 1e7);

/// One-step terms for taking `action` in `state`: KL[P(.|s,a) || C] (finite
/// mode), E[R(s')] and -H[P(.|s,a)].
EfeScore one_step_score(const FiniteMdp& mdp, const Preferences& prefs, std::size_t state, std::size_t action);

/// The same terms for an arbitrary next-state distribution.
EfeScore step_score(const Preferences& prefs, std::span<const double> next);

}  // namespace efe
