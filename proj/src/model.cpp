#include "efe/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "efe/error.hpp"
#include "efe/rng.hpp"

namespace efe {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotADistribution: return "NotADistribution";
    case ErrorKind::NonFiniteReward: return "NonFiniteReward";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::AgentOutOfRange: return "AgentOutOfRange";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::NonPositiveBeta: return "NonPositiveBeta";
    case ErrorKind::ImpossibleObservation: return "ImpossibleObservation";
    case ErrorKind::ZeroColumn: return "ZeroColumn";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

void check_distribution(std::span<const double> probs, double tol, const std::string& what) {
  require(!probs.empty(), ErrorKind::DimensionMismatch, what + " is empty");
  double sum = 0.0;
  for (double p : probs) {
    require(std::isfinite(p) && p >= 0.0, ErrorKind::NotADistribution, what + " has a negative or non-finite entry");
    sum += p;
  }
  require(std::abs(sum - 1.0) <= tol, ErrorKind::NotADistribution,
          what + " sums to " + std::to_string(sum));
}

namespace {

// Validates a raw row and appends its renormalized copy to `out`.
void append_row(std::vector<double>& out, const std::vector<double>& row, std::size_t expected,
                const std::string& what) {
  require(row.size() == expected, ErrorKind::DimensionMismatch,
          what + " has length " + std::to_string(row.size()) + ", expected " + std::to_string(expected));
  check_distribution(row, kInputTolerance, what);
  // Rows already within the internal tolerance are kept bit-for-bit, which
  // makes validation idempotent.
  const double sum = std::accumulate(row.begin(), row.end(), 0.0);
  const double scale = std::abs(sum - 1.0) <= kNormTolerance ? 1.0 : sum;
  for (double p : row) out.push_back(p / scale);
}

}  // namespace

std::vector<std::size_t> FiniteMdp::allowed_actions(std::size_t state) const {
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < n_actions_; ++a)
    if (allowed(state, a)) out.push_back(a);
  return out;
}

std::vector<bool> FiniteMdp::allowed_mask(std::size_t state) const {
  std::vector<bool> out(n_actions_);
  for (std::size_t a = 0; a < n_actions_; ++a) out[a] = allowed(state, a);
  return out;
}

FiniteMdp FiniteMdp::with_horizon(std::size_t horizon) const {
  require(horizon >= 1, ErrorKind::OutOfRange, "horizon must be >= 1");
  FiniteMdp copy = *this;
  copy.horizon_ = horizon;
  return copy;
}

FiniteMdp validate_mdp(const RawModel& raw) {
  require(raw.n_states > 0 && raw.n_actions > 0, ErrorKind::DimensionMismatch, "n_states and n_actions must be positive");
  require(raw.horizon >= 1, ErrorKind::DimensionMismatch, "horizon must be >= 1");
  const std::size_t S = raw.n_states;
  const std::size_t A = raw.n_actions;
  require(raw.transition.size() == A, ErrorKind::DimensionMismatch, "transition must have n_actions slices");

  FiniteMdp mdp;
  mdp.n_states_ = S;
  mdp.n_actions_ = A;
  mdp.horizon_ = raw.horizon;
  mdp.transition_.reserve(A * S * S);
  for (std::size_t a = 0; a < A; ++a) {
    require(raw.transition[a].size() == S, ErrorKind::DimensionMismatch,
            "transition[" + std::to_string(a) + "] must have n_states rows");
    for (std::size_t s = 0; s < S; ++s)
      append_row(mdp.transition_, raw.transition[a][s], S,
                 "transition[" + std::to_string(a) + "][" + std::to_string(s) + "]");
  }
  append_row(mdp.initial_, raw.initial, S, "initial");

  require(raw.reward.size() == S, ErrorKind::DimensionMismatch, "reward must have n_states entries");
  for (double r : raw.reward) require(std::isfinite(r), ErrorKind::NonFiniteReward, "reward entries must be finite");
  mdp.reward_ = raw.reward;

  if (raw.action_mask) {
    const auto& mask = *raw.action_mask;
    require(mask.size() == S, ErrorKind::DimensionMismatch, "action_mask must have n_states rows");
    mdp.mask_.reserve(S * A);
    for (std::size_t s = 0; s < S; ++s) {
      require(mask[s].size() == A, ErrorKind::DimensionMismatch, "action_mask rows must have n_actions entries");
      bool any = false;
      for (bool b : mask[s]) {
        mdp.mask_.push_back(b ? 1 : 0);
        any = any || b;
      }
      require(any, ErrorKind::NotADistribution, "state " + std::to_string(s) + " has no admissible action");
    }
    // An all-true mask is the same model as no mask.
    if (std::all_of(mdp.mask_.begin(), mdp.mask_.end(), [](unsigned char m) { return m != 0; })) mdp.mask_.clear();
  }
  mdp.labels_ = raw.labels;
  return mdp;
}

double FinitePomdp::observation_entropy(std::size_t state) const {
  double h = 0.0;
  for (double p : likelihood_row(state))
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

FinitePomdp FinitePomdp::with_horizon(std::size_t horizon) const {
  FinitePomdp copy = *this;
  copy.mdp_ = mdp_.with_horizon(horizon);
  return copy;
}

FinitePomdp validate_pomdp(const RawModel& raw) {
  FinitePomdp pomdp;
  pomdp.mdp_ = validate_mdp(raw);
  require(raw.n_obs.has_value() && *raw.n_obs > 0, ErrorKind::DimensionMismatch, "POMDP requires positive n_obs");
  require(raw.likelihood.has_value(), ErrorKind::DimensionMismatch, "POMDP requires a likelihood matrix");
  const std::size_t S = raw.n_states;
  pomdp.n_obs_ = *raw.n_obs;
  require(raw.likelihood->size() == S, ErrorKind::DimensionMismatch, "likelihood must have n_states rows");
  pomdp.likelihood_.reserve(S * pomdp.n_obs_);
  for (std::size_t s = 0; s < S; ++s)
    append_row(pomdp.likelihood_, (*raw.likelihood)[s], pomdp.n_obs_, "likelihood[" + std::to_string(s) + "]");
  return pomdp;
}

RawModel to_raw(const FiniteMdp& mdp) {
  RawModel raw;
  raw.type = "mdp";
  raw.n_states = mdp.n_states();
  raw.n_actions = mdp.n_actions();
  raw.horizon = mdp.horizon();
  raw.transition.assign(mdp.n_actions(), {});
  for (std::size_t a = 0; a < mdp.n_actions(); ++a)
    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
      auto row = mdp.row(a, s);
      raw.transition[a].emplace_back(row.begin(), row.end());
    }
  raw.initial.assign(mdp.initial().begin(), mdp.initial().end());
  raw.reward.assign(mdp.reward().begin(), mdp.reward().end());
  if (mdp.has_mask()) {
    std::vector<std::vector<bool>> mask(mdp.n_states(), std::vector<bool>(mdp.n_actions()));
    for (std::size_t s = 0; s < mdp.n_states(); ++s)
      for (std::size_t a = 0; a < mdp.n_actions(); ++a) mask[s][a] = mdp.allowed(s, a);
    raw.action_mask = std::move(mask);
  }
  raw.labels = mdp.labels();
  return raw;
}

RawModel to_raw(const FinitePomdp& pomdp) {
  RawModel raw = to_raw(pomdp.mdp());
  raw.type = "pomdp";
  raw.n_obs = pomdp.n_obs();
  std::vector<std::vector<double>> lik;
  for (std::size_t s = 0; s < pomdp.n_states(); ++s) {
    auto row = pomdp.likelihood_row(s);
    lik.emplace_back(row.begin(), row.end());
  }
  raw.likelihood = std::move(lik);
  return raw;
}

StateActionPolicy StateActionPolicy::uniform(const FiniteMdp& mdp) {
  StateActionPolicy policy(mdp.horizon(), mdp.n_states(), mdp.n_actions());
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    const auto allowed = mdp.allowed_actions(s);
    for (std::size_t t = 0; t < mdp.horizon(); ++t)
      for (std::size_t a : allowed) policy(t, s, a) = 1.0 / static_cast<double>(allowed.size());
  }
  return policy;
}

StateActionPolicy StateActionPolicy::deterministic(const FiniteMdp& mdp, std::span<const std::size_t> choice) {
  require(choice.size() == mdp.horizon() * mdp.n_states(), ErrorKind::DimensionMismatch,
          "deterministic policy needs T*S choices");
  StateActionPolicy policy(mdp.horizon(), mdp.n_states(), mdp.n_actions());
  for (std::size_t t = 0; t < mdp.horizon(); ++t)
    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
      const std::size_t a = choice[t * mdp.n_states() + s];
      require(a < mdp.n_actions(), ErrorKind::OutOfRange, "action index out of range");
      policy(t, s, a) = 1.0;
    }
  return policy;
}

void validate_policy(const FiniteMdp& mdp, const StateActionPolicy& policy) {
  require(policy.horizon() == mdp.horizon() && policy.n_states() == mdp.n_states() &&
              policy.n_actions() == mdp.n_actions(),
          ErrorKind::DimensionMismatch, "policy shape does not match model");
  for (std::size_t t = 0; t < mdp.horizon(); ++t)
    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
      check_distribution(policy.slice(t, s), kInputTolerance,
                         "policy[" + std::to_string(t) + "][" + std::to_string(s) + "]");
      for (std::size_t a = 0; a < mdp.n_actions(); ++a)
        require(mdp.allowed(s, a) || policy(t, s, a) == 0.0, ErrorKind::NotADistribution,
                "policy puts mass on a disallowed action");
    }
}

double Episode::total_return() const {
  double total = 0.0;
  for (std::size_t i = 1; i < rewards.size(); ++i) total += rewards[i];
  return total;
}

double trajectory_probability(const FiniteMdp& mdp, std::span<const std::size_t> actions,
                              std::span<const std::size_t> states) {
  require(actions.size() == mdp.horizon() && states.size() == mdp.horizon() + 1, ErrorKind::LengthMismatch,
          "need T actions and T+1 states");
  for (std::size_t a : actions) require(a < mdp.n_actions(), ErrorKind::OutOfRange, "action index out of range");
  for (std::size_t s : states) require(s < mdp.n_states(), ErrorKind::OutOfRange, "state index out of range");
  double p = mdp.initial()[states[0]];
  for (std::size_t tau = 1; tau < states.size() && p != 0.0; ++tau)
    p *= mdp.transition(actions[tau - 1], states[tau - 1], states[tau]);
  return p;
}

namespace {

std::size_t checked_action(const FiniteMdp& mdp, std::size_t t, std::size_t state, std::size_t action) {
  require(action < mdp.n_actions() && mdp.allowed(state, action), ErrorKind::AgentOutOfRange,
          "agent returned action " + std::to_string(action) + " at time " + std::to_string(t));
  return action;
}

}  // namespace

Episode rollout(const FiniteMdp& mdp, const MdpAgent& agent, std::uint64_t seed) {
  Rng rng(seed);
  Episode ep;
  ep.states.push_back(rng.categorical(mdp.initial()));
  for (std::size_t t = 0; t < mdp.horizon(); ++t) {
    const std::size_t s = ep.states.back();
    const std::size_t a = checked_action(mdp, t, s, agent(t, s));
    ep.actions.push_back(a);
    ep.states.push_back(rng.categorical(mdp.row(a, s)));
  }
  for (std::size_t s : ep.states) ep.rewards.push_back(mdp.reward(s));
  return ep;
}

Episode rollout(const FinitePomdp& pomdp, const PomdpAgent& agent, std::uint64_t seed) {
  const FiniteMdp& mdp = pomdp.mdp();
  Rng rng(seed);
  Episode ep;
  std::vector<std::size_t> obs;
  ep.states.push_back(rng.categorical(mdp.initial()));
  obs.push_back(rng.categorical(pomdp.likelihood_row(ep.states.back())));
  for (std::size_t t = 0; t < mdp.horizon(); ++t) {
    const std::size_t s = ep.states.back();
    const std::size_t a = checked_action(mdp, t, s, agent(t, obs, ep.actions));
    ep.actions.push_back(a);
    ep.states.push_back(rng.categorical(mdp.row(a, s)));
    obs.push_back(rng.categorical(pomdp.likelihood_row(ep.states.back())));
  }
  for (std::size_t s : ep.states) ep.rewards.push_back(mdp.reward(s));
  ep.observations = std::move(obs);
  return ep;
}

}  // namespace efe
