#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "efe/model.hpp"
#include "efe/model_io.hpp"

namespace efe {

enum GridAction : std::size_t { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };

/// Cells are indexed y * width + x, with y growing southwards. The intended
/// move succeeds with probability 1 - slip; each perpendicular move takes
/// slip / 2. Moves off the grid leave the agent in place. Reward 1 on
/// reward_cell, 0 elsewhere; the agent starts on start_cell.
FiniteMdp gen_gridworld(std::size_t width, std::size_t height, std::size_t reward_cell, double slip,
                        std::size_t horizon, std::size_t start_cell = 0);

/// T-maze locations; state index = location * 2 + context (0 = reward on the
/// left, 1 = reward on the right).
enum TmazeLocation : std::size_t { kStart = 0, kCue = 1, kLeftArm = 2, kRightArm = 3, kWin = 4, kEnd = 5 };
enum TmazeAction : std::size_t { kStay = 0, kGoCue = 1, kGoLeft = 2, kGoRight = 3 };
/// Observations of the default variant: the location, except at the cue
/// where a hint (left/right) is emitted instead.
enum TmazeObs : std::size_t {
  kSeeStart = 0, kHintLeft = 1, kHintRight = 2, kSeeLeft = 3, kSeeRight = 4, kSeeWin = 5, kSeeEnd = 6
};

/// Start and cue let the agent move to the cue or either arm (stay keeps it
/// in place). Entering the context-correct arm leads to a rewarding win
/// location, the other arm straight to the absorbing end; win also moves on to
/// end, so the reward is collected once. With the default horizon of 3 the
/// informed path cue -> arm -> win has no slack. The context is hidden and
/// uniform at the start; the cue hint names it with probability
/// cue_reliability. With identity_likelihood every state is observed directly.
FinitePomdp gen_tmaze(double cue_reliability, std::size_t horizon = 3, bool identity_likelihood = false);

struct RandomSpec {
  std::uint64_t seed = 0;
  std::size_t n_states = 3;
  std::size_t n_actions = 2;
  std::size_t horizon = 2;
  std::optional<std::size_t> n_obs;  // set for a POMDP
  double sparsity = 0.0;             // chance of zeroing each transition entry
  bool deterministic = false;        // Dirac transition rows
  bool reward_ties = false;          // rewards in {0, 1} instead of uniform [0, 1]
};

/// Transition, initial and likelihood rows from a symmetric Dirichlet(1);
/// rewards uniform on [0, 1]. Bit-reproducible per spec.
AnyModel gen_random(const RandomSpec& spec);
FiniteMdp gen_random_mdp(const RandomSpec& spec);
FinitePomdp gen_random_pomdp(const RandomSpec& spec);

/// Copy of `pomdp` with the likelihood replaced (rows indexed by state).
FinitePomdp with_likelihood(const FinitePomdp& pomdp, const std::vector<std::vector<double>>& likelihood);

/// Copy of `mdp` observed through an identity likelihood.
FinitePomdp identity_pomdp(const FiniteMdp& mdp);

}  // namespace efe
