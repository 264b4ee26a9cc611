#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "efe/envs.hpp"
#include "efe/error.hpp"
#include "efe/model.hpp"

namespace testing {

using Tensor = std::vector<std::vector<std::vector<double>>>;

inline efe::RawModel raw_mdp(std::size_t horizon, Tensor transition, std::vector<double> initial,
                             std::vector<double> reward) {
  efe::RawModel raw;
  raw.n_actions = transition.size();
  raw.n_states = initial.size();
  raw.horizon = horizon;
  raw.transition = std::move(transition);
  raw.initial = std::move(initial);
  raw.reward = std::move(reward);
  return raw;
}

inline efe::FiniteMdp make_mdp(std::size_t horizon, Tensor transition, std::vector<double> initial,
                               std::vector<double> reward) {
  return efe::validate_mdp(raw_mdp(horizon, std::move(transition), std::move(initial), std::move(reward)));
}

/// Two states, actions {stay, go-to-1}, deterministic.
inline efe::FiniteMdp two_state_bandit(std::size_t horizon, std::vector<double> reward = {0.0, 1.0}) {
  return make_mdp(horizon, {{{1, 0}, {0, 1}}, {{0, 1}, {0, 1}}}, {1, 0}, reward);
}

inline efe::RandomSpec spec(std::uint64_t seed, std::size_t s, std::size_t a, std::size_t t) {
  efe::RandomSpec r;
  r.seed = seed;
  r.n_states = s;
  r.n_actions = a;
  r.horizon = t;
  return r;
}

/// Sizes drawn from the seed: |S| in [2, max_s], |A| in [1, max_a], T in [1, max_t].
inline efe::RandomSpec sized_spec(std::uint64_t seed, std::size_t max_s, std::size_t max_a, std::size_t max_t,
                                  std::size_t min_a = 1) {
  efe::RandomSpec r;
  r.seed = seed;
  r.n_states = 2 + seed % (max_s - 1);
  r.n_actions = min_a + (seed / 7) % (max_a - min_a + 1);
  r.horizon = 1 + (seed / 3) % max_t;
  return r;
}

/// Kind of the efe::Error thrown by fn, or nullopt if it returns normally.
template <typename Fn>
std::optional<efe::ErrorKind> error_kind(Fn&& fn) {
  try {
    fn();
  } catch (const efe::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

}  // namespace testing
