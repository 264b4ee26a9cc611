#include "efe/standard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "efe/dp.hpp"
#include "efe/error.hpp"

namespace efe {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Relative-mass tolerance when picking the most probable first action.
constexpr double kMassTolerance = 1e-12;

}  // namespace

double log_sum_exp(std::span<const double> xs) {
  double top = kNegInf;
  for (double x : xs) top = std::max(top, x);
  if (top == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - top);
  return top + std::log(sum);
}

std::vector<ActionSequence> enumerate_sequences(std::size_t n_actions, std::size_t length,
                                                const std::vector<bool>& first_allowed, double guard) {
  require(length >= 1, ErrorKind::LengthMismatch, "planning horizon must be at least one step");
  const double count = std::pow(static_cast<double>(n_actions), static_cast<double>(length));
  require(count <= guard, ErrorKind::TooLarge,
          std::to_string(count) + " action sequences exceed guard " + std::to_string(guard));
  std::vector<ActionSequence> out;
  out.reserve(static_cast<std::size_t>(count));
  ActionSequence seq(length, 0);
  while (true) {
    if (first_allowed.empty() || first_allowed[seq[0]]) out.push_back(seq);
    std::size_t k = length;
    while (k-- > 0) {
      if (++seq[k] < n_actions) break;
      seq[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

StandardPlan select_first_action(std::vector<SequenceScore> scores, std::size_t n_actions,
                                 const std::vector<bool>& first_allowed, bool limit) {
  StandardPlan plan;
  plan.action_posterior.assign(n_actions, 0.0);
  plan.log_weight.assign(n_actions, kNegInf);
  plan.best_reward.assign(n_actions, kNegInf);

  std::vector<std::vector<const SequenceScore*>> by_first(n_actions);
  for (const auto& s : scores)
    if (!s.score.is_pruned()) by_first[s.actions.front()].push_back(&s);

  if (!limit) {
    for (std::size_t a = 0; a < n_actions; ++a) {
      std::vector<double> terms;
      for (const auto* s : by_first[a]) terms.push_back(-s->score.g);
      plan.log_weight[a] = log_sum_exp(terms);
    }
  } else {
    for (std::size_t a = 0; a < n_actions; ++a) {
      for (const auto* s : by_first[a]) plan.best_reward[a] = std::max(plan.best_reward[a], s->score.expected_reward);
      std::vector<double> terms;
      for (const auto* s : by_first[a])
        if (s->score.expected_reward >= plan.best_reward[a] - kTieTolerance) terms.push_back(-s->score.residual);
      plan.log_weight[a] = log_sum_exp(terms);
    }
  }

  // In the limit, all mass goes to first actions whose best expected reward is
  // globally maximal; their relative mass is the exp(log_weight) coefficient.
  std::vector<bool> eligible(n_actions, false);
  const double top_reward = *std::max_element(plan.best_reward.begin(), plan.best_reward.end());
  for (std::size_t a = 0; a < n_actions; ++a) {
    const bool allowed = first_allowed.empty() || first_allowed[a];
    eligible[a] = allowed && plan.log_weight[a] > kNegInf &&
                  (!limit || plan.best_reward[a] >= top_reward - kTieTolerance);
  }
  double top = kNegInf;
  for (std::size_t a = 0; a < n_actions; ++a)
    if (eligible[a]) top = std::max(top, plan.log_weight[a]);
  require(top > kNegInf, ErrorKind::OutOfRange, "no admissible action sequence survived");
  double total = 0.0;
  for (std::size_t a = 0; a < n_actions; ++a)
    if (eligible[a]) total += plan.action_posterior[a] = std::exp(plan.log_weight[a] - top);
  for (double& p : plan.action_posterior) p /= total;

  const double best = *std::max_element(plan.action_posterior.begin(), plan.action_posterior.end());
  for (std::size_t a = 0; a < n_actions; ++a)
    if (eligible[a] && plan.action_posterior[a] >= best - kMassTolerance) plan.winning_set.push_back(a);
  plan.chosen = plan.winning_set.front();
  plan.per_sequence = std::move(scores);
  return plan;
}

StandardPlan plan_over_sequences(std::size_t n_actions, std::size_t length, const std::vector<bool>& first_allowed,
                                 const SequenceScorer& scorer, const StandardOptions& options, bool limit) {
  auto sequences = enumerate_sequences(n_actions, length, first_allowed, options.guards.sequences);
  std::vector<SequenceScore> scores(sequences.size());
  const bool pruning = options.prune.has_value() && options.efe == EfeMode::MeanField && !limit;
  if (pruning) {
    PruneWindow window{*options.prune, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < sequences.size(); ++i) {
      std::optional<PruneWindow> active;
      if (std::isfinite(window.best_seen)) active = window;
      scores[i] = {sequences[i], scorer(sequences[i], active)};
      if (!scores[i].score.is_pruned()) window.best_seen = std::min(window.best_seen, scores[i].score.g);
    }
  } else {
    parallel_for(sequences.size(), options.exec,
                 [&](std::size_t i) { scores[i] = {sequences[i], scorer(sequences[i], std::nullopt)}; });
  }
  return select_first_action(std::move(scores), n_actions, first_allowed, limit);
}

StandardPlan standard_plan(const FiniteMdp& mdp, const Preferences& prefs, std::size_t state, std::size_t time,
                           const StandardOptions& options) {
  require(state < mdp.n_states(), ErrorKind::OutOfRange, "state index out of range");
  require(time < mdp.horizon(), ErrorKind::OutOfRange, "planning time must be < T");
  require(prefs.reward().size() == mdp.n_states(), ErrorKind::DimensionMismatch, "preferences do not match model");
  const std::vector<bool> first_allowed = mdp.allowed_mask(state);

  const SequenceScorer scorer = [&](const ActionSequence& seq, std::optional<PruneWindow> window) {
    if (options.efe == EfeMode::MeanField) return efe_mean_field(mdp, prefs, seq, state, window);
    return efe_exact(mdp, prefs, seq, state, options.guards.trajectories);
  };
  return plan_over_sequences(mdp.n_actions(), mdp.horizon() - time, first_allowed, scorer, options,
                             prefs.is_limit());
}

}  // namespace efe
