#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace efe {

/// Finite inverse temperature beta > 0.
struct Beta {
  double value = 1.0;
};
/// The analytic beta -> infinity regime.
struct ZeroTemperature {};

using PreferenceMode = std::variant<Beta, ZeroTemperature>;

/// Preferred-state distribution C_beta(s) proportional to exp(beta R(s)).
///
/// In the zero-temperature limit no distribution is materialized; the set of
/// reward-maximizing states is kept instead and planners score candidates by
/// (expected reward, residual) pairs.
class Preferences {
 public:
  static Preferences finite(std::span<const double> reward, double beta);
  static Preferences zero_temperature(std::span<const double> reward);

  bool is_limit() const noexcept { return limit_; }
  double beta() const noexcept { return beta_; }
  /// log C_beta(s); empty in the limit mode.
  std::span<const double> log_c() const noexcept { return log_c_; }
  double log_c(std::size_t s) const { return log_c_[s]; }
  std::span<const double> reward() const noexcept { return reward_; }
  double reward(std::size_t s) const { return reward_[s]; }
  /// argmax_s R(s) within 1e-12.
  const std::vector<std::size_t>& max_reward_set() const noexcept { return max_reward_set_; }
  /// log sum_s exp(beta R(s)); the per-step normalizer (finite mode).
  double log_normalizer() const noexcept { return log_normalizer_; }

 private:
  bool limit_ = false;
  double beta_ = 0.0;
  double log_normalizer_ = 0.0;
  std::vector<double> reward_;
  std::vector<double> log_c_;
  std::vector<std::size_t> max_reward_set_;
};

/// Throws NonPositiveBeta for beta <= 0 (or non-finite), NonFiniteReward for bad rewards.
Preferences build_preferences(std::span<const double> reward, const PreferenceMode& mode);

/// Expected free energy of one candidate.
///
/// Finite mode orders by `g` (nats). Limit mode orders lexicographically by
/// (-expected_reward, residual), the leading and constant terms of
/// G = -beta E[R] + residual + const as beta grows. `expected_reward` and
/// `residual` are filled in both modes; `g` is NaN in limit mode. Pruned
/// scores order above everything else.
struct EfeScore {
  enum class Kind { Finite, Limit, Pruned };
  Kind kind = Kind::Finite;
  double g = 0.0;
  double expected_reward = 0.0;
  double residual = 0.0;

  static EfeScore pruned() { return EfeScore{Kind::Pruned, 0.0, 0.0, 0.0}; }
  bool is_pruned() const noexcept { return kind == Kind::Pruned; }
};

/// -1 if a is strictly better (lower EFE) than b, +1 if strictly worse, 0 if
/// tied within tol on every compared component.
int compare(const EfeScore& a, const EfeScore& b, double tol);

/// Indices of the minimal scores (within tol), restricted to `allowed`
/// (empty = all allowed).
std::vector<std::size_t> argmin_set(std::span<const EfeScore> scores, const std::vector<bool>& allowed, double tol);

}  // namespace efe
