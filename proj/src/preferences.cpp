#include "efe/preferences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "efe/error.hpp"

namespace efe {

namespace {

void check_rewards(std::span<const double> reward) {
  require(!reward.empty(), ErrorKind::DimensionMismatch, "reward is empty");
  for (double r : reward) require(std::isfinite(r), ErrorKind::NonFiniteReward, "reward entries must be finite");
}

std::vector<std::size_t> reward_argmax(std::span<const double> reward) {
  const double best = *std::max_element(reward.begin(), reward.end());
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < reward.size(); ++s)
    if (reward[s] >= best - 1e-12) out.push_back(s);
  return out;
}

}  // namespace

Preferences Preferences::finite(std::span<const double> reward, double beta) {
  check_rewards(reward);
  require(std::isfinite(beta) && beta > 0.0, ErrorKind::NonPositiveBeta, "beta must be a positive finite number");
  Preferences p;
  p.beta_ = beta;
  p.reward_.assign(reward.begin(), reward.end());
  p.max_reward_set_ = reward_argmax(reward);
  // Max-subtracted log-sum-exp keeps exp() in range for large beta.
  const double top = beta * *std::max_element(reward.begin(), reward.end());
  double sum = 0.0;
  for (double r : reward) sum += std::exp(beta * r - top);
  p.log_normalizer_ = top + std::log(sum);
  p.log_c_.reserve(reward.size());
  for (double r : reward) p.log_c_.push_back(beta * r - p.log_normalizer_);
  return p;
}

Preferences Preferences::zero_temperature(std::span<const double> reward) {
  check_rewards(reward);
  Preferences p;
  p.limit_ = true;
  p.beta_ = std::numeric_limits<double>::infinity();
  p.reward_.assign(reward.begin(), reward.end());
  p.max_reward_set_ = reward_argmax(reward);
  return p;
}

Preferences build_preferences(std::span<const double> reward, const PreferenceMode& mode) {
  if (const auto* beta = std::get_if<Beta>(&mode)) return Preferences::finite(reward, beta->value);
  return Preferences::zero_temperature(reward);
}

int compare(const EfeScore& a, const EfeScore& b, double tol) {
  if (a.is_pruned() || b.is_pruned()) return a.is_pruned() == b.is_pruned() ? 0 : (a.is_pruned() ? 1 : -1);
  if (a.kind == EfeScore::Kind::Finite) {
    if (a.g == b.g) return 0;  // also covers +inf == +inf
    if (a.g < b.g - tol) return -1;
    if (a.g > b.g + tol) return 1;
    return 0;
  }
  if (a.expected_reward > b.expected_reward + tol) return -1;
  if (a.expected_reward < b.expected_reward - tol) return 1;
  if (a.residual < b.residual - tol) return -1;
  if (a.residual > b.residual + tol) return 1;
  return 0;
}

std::vector<std::size_t> argmin_set(std::span<const EfeScore> scores, const std::vector<bool>& allowed, double tol) {
  std::vector<std::size_t> live;
  bool all_pruned = true;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!allowed.empty() && !allowed[i]) continue;
    live.push_back(i);
    all_pruned = all_pruned && scores[i].is_pruned();
  }
  if (live.empty() || all_pruned) return live;
  std::erase_if(live, [&](std::size_t i) { return scores[i].is_pruned(); });

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> out;
  if (scores[live.front()].kind == EfeScore::Kind::Finite) {
    double best = inf;
    for (std::size_t i : live) best = std::min(best, scores[i].g);
    for (std::size_t i : live)
      if (scores[i].g == best || scores[i].g <= best + tol) out.push_back(i);
    return out;
  }
  // Lexicographic: reward first, then residual among the reward maximizers.
  double top = -inf;
  for (std::size_t i : live) top = std::max(top, scores[i].expected_reward);
  double low = inf;
  for (std::size_t i : live)
    if (scores[i].expected_reward >= top - tol) low = std::min(low, scores[i].residual);
  for (std::size_t i : live)
    if (scores[i].expected_reward >= top - tol && scores[i].residual <= low + tol) out.push_back(i);
  return out;
}

}  // namespace efe
