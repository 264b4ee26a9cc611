#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "efe/kernels.hpp"
#include "efe/model.hpp"

namespace efe {

/// Absolute tolerance for argmax/argmin ties.
inline constexpr double kTieTolerance = 1e-9;
/// Default cap on the number of deterministic policies the oracle enumerates.
inline constexpr double kBruteForceGuard = 1e7;

/// v(s, t) for t = 0..T; row T is identically zero.
class ValueFunction {
 public:
  ValueFunction() = default;
  ValueFunction(std::size_t horizon, std::size_t n_states)
      : horizon_(horizon), n_states_(n_states), values_((horizon + 1) * n_states, 0.0) {}

  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t n_states() const noexcept { return n_states_; }
  double operator()(std::size_t t, std::size_t s) const { return values_[t * n_states_ + s]; }
  double& operator()(std::size_t t, std::size_t s) { return values_[t * n_states_ + s]; }
  std::span<const double> at(std::size_t t) const { return {values_.data() + t * n_states_, n_states_}; }
  std::span<double> at(std::size_t t) { return {values_.data() + t * n_states_, n_states_}; }
  std::span<const double> data() const noexcept { return values_; }
  std::span<double> data() noexcept { return values_; }

  bool operator==(const ValueFunction&) const = default;

 private:
  std::size_t horizon_ = 0;
  std::size_t n_states_ = 0;
  std::vector<double> values_;
};

/// q(t, s, a) for t = 0..T-1.
class QTable {
 public:
  QTable() = default;
  QTable(std::size_t horizon, std::size_t n_states, std::size_t n_actions)
      : horizon_(horizon), n_states_(n_states), n_actions_(n_actions),
        q_(horizon * n_states * n_actions, 0.0) {}

  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  double operator()(std::size_t t, std::size_t s, std::size_t a) const {
    return q_[(t * n_states_ + s) * n_actions_ + a];
  }
  std::span<const double> slice(std::size_t t, std::size_t s) const {
    return {q_.data() + (t * n_states_ + s) * n_actions_, n_actions_};
  }
  /// All (s, a) entries at time t, laid out s-major.
  std::span<double> time_slice(std::size_t t) {
    return {q_.data() + t * n_states_ * n_actions_, n_states_ * n_actions_};
  }

  bool operator==(const QTable&) const = default;

 private:
  std::size_t horizon_ = 0;
  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  std::vector<double> q_;
};

struct StateTime {
  std::size_t state = 0;
  std::size_t time = 0;
  bool operator==(const StateTime&) const = default;
};

enum class Order { Better, Worse, Equal, Incomparable };

struct PartialOrderResult {
  Order relation = Order::Equal;
  std::optional<StateTime> witness;
};

/// Exact backward recursion for v_Pi.
ValueFunction evaluate_policy(const FiniteMdp& mdp, const StateActionPolicy& policy);

/// q_Pi(t, s, a) = sum_{s'} P(s'|s,a) (R(s') + v_Pi(s', t+1)).
QTable policy_q_table(const FiniteMdp& mdp, const ValueFunction& values, Exec exec = Exec::Parallel);

PartialOrderResult compare_policies(const FiniteMdp& mdp, const StateActionPolicy& first,
                                    const StateActionPolicy& second, double tol = kTieTolerance);

struct BackwardInductionResult {
  StateActionPolicy policy;  // uniform over each argmax set
  ValueFunction values;
  QTable q;
  std::vector<std::vector<std::size_t>> argmax_sets;  // [t * S + s]
  std::vector<std::size_t> canonical;                 // lowest-index argmax, [t * S + s]

  const std::vector<std::size_t>& argmax(std::size_t t, std::size_t s) const {
    return argmax_sets[t * values.n_states() + s];
  }
};

/// Admissible actions within tol of the best entry of q_row.
std::vector<std::size_t> argmax_set(const FiniteMdp& mdp, std::size_t state, std::span<const double> q_row, double tol);

BackwardInductionResult backward_induction(const FiniteMdp& mdp, double tie_tol = kTieTolerance,
                                           Exec exec = Exec::Parallel);

/// Pointwise maximum of v_Pi over every deterministic state-action policy.
/// Throws TooLarge when the number of such policies exceeds `guard`.
ValueFunction brute_force_optimal_values(const FiniteMdp& mdp, double guard = kBruteForceGuard,
                                         Exec exec = Exec::Parallel);

/// Number of deterministic state-action policies (as a double; may be huge).
double deterministic_policy_count(const FiniteMdp& mdp);

struct OptimalityCheck {
  bool optimal = true;
  std::optional<StateTime> witness;  // latest time first, then lowest state
};

/// Checks, from T-1 backwards, that the policy only uses actions that are
/// argmax of its own continuation q-values.
OptimalityCheck check_bellman_optimal(const FiniteMdp& mdp, const StateActionPolicy& policy,
                                      double tol = kTieTolerance);

}  // namespace efe
