#include "efe/envs.hpp"

#include <string>

#include "efe/error.hpp"
#include "efe/rng.hpp"

namespace efe {

namespace {

constexpr std::size_t kMaxCells = 100;
constexpr std::size_t kMaxRandomSize = 64;

std::vector<double> dirichlet_row(Rng& rng, std::size_t n, double sparsity) {
  std::vector<double> row(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool zeroed = sparsity > 0.0 && rng.uniform() < sparsity;
    row[i] = rng.exponential();
    if (zeroed) row[i] = 0.0;
    total += row[i];
  }
  if (total == 0.0) {
    row[rng.index(n)] = 1.0;
    return row;
  }
  for (double& x : row) x /= total;
  return row;
}

}  // namespace

FiniteMdp gen_gridworld(std::size_t width, std::size_t height, std::size_t reward_cell, double slip,
                        std::size_t horizon, std::size_t start_cell) {
  require(width >= 1 && height >= 1 && width * height <= kMaxCells, ErrorKind::OutOfRange,
          "grid must have between 1 and 100 cells");
  require(slip >= 0.0 && slip <= 0.5, ErrorKind::OutOfRange, "slip must be in [0, 0.5]");
  const std::size_t n = width * height;
  require(reward_cell < n && start_cell < n, ErrorKind::OutOfRange, "cell index out of range");
  require(horizon >= 1, ErrorKind::OutOfRange, "horizon must be >= 1");

  const auto step = [&](std::size_t cell, std::size_t dir) {
    const std::size_t x = cell % width;
    const std::size_t y = cell / width;
    switch (dir) {
      case kNorth: return y == 0 ? cell : cell - width;
      case kEast: return x + 1 == width ? cell : cell + 1;
      case kSouth: return y + 1 == height ? cell : cell + width;
      default: return x == 0 ? cell : cell - 1;
    }
  };

  RawModel raw;
  raw.n_states = n;
  raw.n_actions = 4;
  raw.horizon = horizon;
  raw.transition.assign(4, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)));
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t s = 0; s < n; ++s) {
      auto& row = raw.transition[a][s];
      row[step(s, a)] += 1.0 - slip;
      row[step(s, (a + 1) % 4)] += slip / 2.0;
      row[step(s, (a + 3) % 4)] += slip / 2.0;
    }
  }
  raw.initial.assign(n, 0.0);
  raw.initial[start_cell] = 1.0;
  raw.reward.assign(n, 0.0);
  raw.reward[reward_cell] = 1.0;
  raw.labels["actions"] = {"N", "E", "S", "W"};
  for (std::size_t s = 0; s < n; ++s)
    raw.labels["states"].push_back("(" + std::to_string(s % width) + "," + std::to_string(s / width) + ")");
  return validate_mdp(raw);
}

FinitePomdp gen_tmaze(double cue_reliability, std::size_t horizon, bool identity_likelihood) {
  require(cue_reliability >= 0.5 && cue_reliability <= 1.0, ErrorKind::OutOfRange,
          "cue reliability must be in [0.5, 1]");
  require(horizon >= 1, ErrorKind::OutOfRange, "horizon must be >= 1");
  constexpr std::size_t S = 12;
  constexpr std::size_t O = 7;
  const auto state = [](std::size_t loc, std::size_t ctx) { return loc * 2 + ctx; };

  RawModel raw;
  raw.type = "pomdp";
  raw.n_states = S;
  raw.n_actions = 4;
  raw.horizon = horizon;
  raw.transition.assign(4, std::vector<std::vector<double>>(S, std::vector<double>(S, 0.0)));
  for (std::size_t ctx = 0; ctx < 2; ++ctx) {
    const std::size_t good_arm = ctx == 0 ? kLeftArm : kRightArm;
    for (std::size_t loc = 0; loc < 6; ++loc) {
      for (std::size_t a = 0; a < 4; ++a) {
        std::size_t dest = kEnd;
        if (loc == kStart || loc == kCue) {
          dest = loc;
          if (a == kGoCue) dest = kCue;
          if (a == kGoLeft) dest = kLeftArm;
          if (a == kGoRight) dest = kRightArm;
        } else if (loc == kLeftArm || loc == kRightArm) {
          dest = loc == good_arm ? kWin : kEnd;
        }
        raw.transition[a][state(loc, ctx)][state(dest, ctx)] = 1.0;
      }
    }
  }
  raw.initial.assign(S, 0.0);
  raw.initial[state(kStart, 0)] = 0.5;
  raw.initial[state(kStart, 1)] = 0.5;
  raw.reward.assign(S, 0.0);
  raw.reward[state(kWin, 0)] = 1.0;
  raw.reward[state(kWin, 1)] = 1.0;

  std::vector<std::vector<double>> lik;
  if (identity_likelihood) {
    raw.n_obs = S;
    lik.assign(S, std::vector<double>(S, 0.0));
    for (std::size_t s = 0; s < S; ++s) lik[s][s] = 1.0;
  } else {
    raw.n_obs = O;
    lik.assign(S, std::vector<double>(O, 0.0));
    for (std::size_t ctx = 0; ctx < 2; ++ctx) {
      lik[state(kStart, ctx)][kSeeStart] = 1.0;
      lik[state(kCue, ctx)][ctx == 0 ? kHintLeft : kHintRight] = cue_reliability;
      lik[state(kCue, ctx)][ctx == 0 ? kHintRight : kHintLeft] = 1.0 - cue_reliability;
      lik[state(kLeftArm, ctx)][kSeeLeft] = 1.0;
      lik[state(kRightArm, ctx)][kSeeRight] = 1.0;
      lik[state(kWin, ctx)][kSeeWin] = 1.0;
      lik[state(kEnd, ctx)][kSeeEnd] = 1.0;
    }
    raw.labels["observations"] = {"start", "hint-left", "hint-right", "left-arm", "right-arm", "win", "end"};
  }
  raw.likelihood = lik;
  raw.labels["actions"] = {"stay", "go-cue", "go-left", "go-right"};
  const char* locations[] = {"start", "cue", "left-arm", "right-arm", "win", "end"};
  for (std::size_t s = 0; s < S; ++s)
    raw.labels["states"].push_back(std::string(locations[s / 2]) + (s % 2 == 0 ? "/L" : "/R"));
  return validate_pomdp(raw);
}

namespace {

RawModel random_raw(const RandomSpec& spec) {
  require(spec.n_states >= 1 && spec.n_states <= kMaxRandomSize, ErrorKind::OutOfRange, "n_states out of range");
  require(spec.n_actions >= 1 && spec.n_actions <= kMaxRandomSize, ErrorKind::OutOfRange, "n_actions out of range");
  require(spec.horizon >= 1 && spec.horizon <= kMaxRandomSize, ErrorKind::OutOfRange, "horizon out of range");
  require(spec.sparsity >= 0.0 && spec.sparsity < 1.0, ErrorKind::OutOfRange, "sparsity must be in [0, 1)");
  if (spec.n_obs) require(*spec.n_obs >= 1 && *spec.n_obs <= kMaxRandomSize, ErrorKind::OutOfRange, "n_obs out of range");

  Rng rng(spec.seed);
  RawModel raw;
  raw.type = spec.n_obs ? "pomdp" : "mdp";
  raw.n_states = spec.n_states;
  raw.n_actions = spec.n_actions;
  raw.horizon = spec.horizon;
  raw.transition.resize(spec.n_actions);
  for (auto& slice : raw.transition) {
    for (std::size_t s = 0; s < spec.n_states; ++s) {
      if (spec.deterministic) {
        std::vector<double> row(spec.n_states, 0.0);
        row[rng.index(spec.n_states)] = 1.0;
        slice.push_back(std::move(row));
      } else {
        slice.push_back(dirichlet_row(rng, spec.n_states, spec.sparsity));
      }
    }
  }
  raw.initial = dirichlet_row(rng, spec.n_states, 0.0);
  raw.reward.resize(spec.n_states);
  for (double& r : raw.reward) r = spec.reward_ties ? static_cast<double>(rng.index(2)) : rng.uniform();
  if (spec.n_obs) {
    raw.n_obs = spec.n_obs;
    std::vector<std::vector<double>> lik;
    for (std::size_t s = 0; s < spec.n_states; ++s) lik.push_back(dirichlet_row(rng, *spec.n_obs, 0.0));
    raw.likelihood = lik;
  }
  return raw;
}

}  // namespace

AnyModel gen_random(const RandomSpec& spec) { return validate_any(random_raw(spec)); }

FiniteMdp gen_random_mdp(const RandomSpec& spec) {
  RandomSpec s = spec;
  s.n_obs.reset();
  return validate_mdp(random_raw(s));
}

FinitePomdp gen_random_pomdp(const RandomSpec& spec) {
  require(spec.n_obs.has_value(), ErrorKind::OutOfRange, "a POMDP needs n_obs");
  return validate_pomdp(random_raw(spec));
}

FinitePomdp with_likelihood(const FinitePomdp& pomdp, const std::vector<std::vector<double>>& likelihood) {
  RawModel raw = to_raw(pomdp);
  raw.n_obs = likelihood.empty() ? 0 : likelihood.front().size();
  raw.likelihood = likelihood;
  return validate_pomdp(raw);
}

FinitePomdp identity_pomdp(const FiniteMdp& mdp) {
  RawModel raw = to_raw(mdp);
  raw.type = "pomdp";
  raw.n_obs = mdp.n_states();
  std::vector<std::vector<double>> lik(mdp.n_states(), std::vector<double>(mdp.n_states(), 0.0));
  for (std::size_t s = 0; s < mdp.n_states(); ++s) lik[s][s] = 1.0;
  raw.likelihood = lik;
  return validate_pomdp(raw);
}

}  // namespace efe
