#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace efe {

/// Row sums may deviate from one by this much in input files; such rows are
/// renormalized. Anything further off is rejected.
inline constexpr double kInputTolerance = 1e-9;
/// Normalization tolerance for distributions produced internally.
inline constexpr double kNormTolerance = 1e-12;

using Labels = std::map<std::string, std::vector<std::string>>;

/// Unvalidated model description, mirroring the JSON model file.
struct RawModel {
  std::string type = "mdp";
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::size_t horizon = 0;
  std::vector<std::vector<std::vector<double>>> transition;  // [action][from][to]
  std::vector<double> initial;
  std::vector<double> reward;
  std::optional<std::size_t> n_obs;
  std::optional<std::vector<std::vector<double>>> likelihood;  // [state][obs]
  std::optional<std::vector<std::vector<bool>>> action_mask;  // [state][action]
  Labels labels;
};

/// Finite-horizon MDP with state-dependent reward. Immutable once validated.
class FiniteMdp {
 public:
  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  std::size_t horizon() const noexcept { return horizon_; }

  double transition(std::size_t action, std::size_t from, std::size_t to) const {
    return transition_[(action * n_states_ + from) * n_states_ + to];
  }
  /// P(. | from, action) as a contiguous row.
  std::span<const double> row(std::size_t action, std::size_t from) const {
    return {transition_.data() + (action * n_states_ + from) * n_states_, n_states_};
  }
  std::span<const double> initial() const noexcept { return initial_; }
  std::span<const double> reward() const noexcept { return reward_; }
  double reward(std::size_t state) const { return reward_[state]; }

  bool has_mask() const noexcept { return !mask_.empty(); }
  bool allowed(std::size_t state, std::size_t action) const {
    return mask_.empty() || mask_[state * n_actions_ + action] != 0;
  }
  std::vector<std::size_t> allowed_actions(std::size_t state) const;
  /// allowed(state, a) for every action.
  std::vector<bool> allowed_mask(std::size_t state) const;

  const Labels& labels() const noexcept { return labels_; }

  /// Same dynamics with a different horizon.
  FiniteMdp with_horizon(std::size_t horizon) const;

  bool operator==(const FiniteMdp&) const = default;

 private:
  friend FiniteMdp validate_mdp(const RawModel& raw);

  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  std::size_t horizon_ = 0;
  std::vector<double> transition_;
  std::vector<double> initial_;
  std::vector<double> reward_;
  std::vector<unsigned char> mask_;
  Labels labels_;
};

/// MDP plus an observation likelihood P(o | s).
class FinitePomdp {
 public:
  const FiniteMdp& mdp() const noexcept { return mdp_; }
  std::size_t n_states() const noexcept { return mdp_.n_states(); }
  std::size_t n_actions() const noexcept { return mdp_.n_actions(); }
  std::size_t horizon() const noexcept { return mdp_.horizon(); }
  std::size_t n_obs() const noexcept { return n_obs_; }

  double likelihood(std::size_t state, std::size_t obs) const {
    return likelihood_[state * n_obs_ + obs];
  }
  std::span<const double> likelihood_row(std::size_t state) const {
    return {likelihood_.data() + state * n_obs_, n_obs_};
  }
  /// H[P(o | state)] in nats.
  double observation_entropy(std::size_t state) const;

  FinitePomdp with_horizon(std::size_t horizon) const;

  bool operator==(const FinitePomdp&) const = default;

 private:
  friend FinitePomdp validate_pomdp(const RawModel& raw);

  FiniteMdp mdp_;
  std::size_t n_obs_ = 0;
  std::vector<double> likelihood_;
};

FiniteMdp validate_mdp(const RawModel& raw);
FinitePomdp validate_pomdp(const RawModel& raw);

RawModel to_raw(const FiniteMdp& mdp);
RawModel to_raw(const FinitePomdp& pomdp);

/// Checks a categorical distribution within `tol`; throws NotADistribution.
void check_distribution(std::span<const double> probs, double tol, const std::string& what);

/// Pi(a | s, t) for t = 0..T-1.
class StateActionPolicy {
 public:
  StateActionPolicy() = default;
  StateActionPolicy(std::size_t horizon, std::size_t n_states, std::size_t n_actions)
      : horizon_(horizon), n_states_(n_states), n_actions_(n_actions),
        table_(horizon * n_states * n_actions, 0.0) {}

  static StateActionPolicy uniform(const FiniteMdp& mdp);
  /// Dirac policy; `choice[t * S + s]` is the action taken.
  static StateActionPolicy deterministic(const FiniteMdp& mdp, std::span<const std::size_t> choice);

  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }

  double operator()(std::size_t t, std::size_t s, std::size_t a) const {
    return table_[(t * n_states_ + s) * n_actions_ + a];
  }
  double& operator()(std::size_t t, std::size_t s, std::size_t a) {
    return table_[(t * n_states_ + s) * n_actions_ + a];
  }
  std::span<const double> slice(std::size_t t, std::size_t s) const {
    return {table_.data() + (t * n_states_ + s) * n_actions_, n_actions_};
  }

  bool operator==(const StateActionPolicy&) const = default;

 private:
  std::size_t horizon_ = 0;
  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  std::vector<double> table_;
};

/// Throws DimensionMismatch on shape errors and NotADistribution on bad
/// slices or mass on disallowed actions.
void validate_policy(const FiniteMdp& mdp, const StateActionPolicy& policy);

/// Future actions a_{t:T-1}; its length fixes the planning time t = T - size.
using ActionSequence = std::vector<std::size_t>;

struct Episode {
  std::vector<std::size_t> states;                     // s_0..s_T
  std::vector<std::size_t> actions;                    // a_0..a_{T-1}
  std::optional<std::vector<std::size_t>> observations;  // o_0..o_T
  std::vector<double> rewards;                         // R(s_0)..R(s_T)

  /// R(s_{1:T}), the quantity the value function scores.
  double total_return() const;

  bool operator==(const Episode&) const = default;
};

/// P(s_0) prod P(s_tau | s_{tau-1}, a_{tau-1}).
double trajectory_probability(const FiniteMdp& mdp, std::span<const std::size_t> actions,
                              std::span<const std::size_t> states);

using MdpAgent = std::function<std::size_t(std::size_t time, std::size_t state)>;
using PomdpAgent = std::function<std::size_t(std::size_t time, std::span<const std::size_t> observations,
                                             std::span<const std::size_t> actions)>;

Episode rollout(const FiniteMdp& mdp, const MdpAgent& agent, std::uint64_t seed);
Episode rollout(const FinitePomdp& pomdp, const PomdpAgent& agent, std::uint64_t seed);

}  // namespace efe
