#include "efe/sophisticated.hpp"

#include <cmath>
#include <limits>

#include "efe/efe.hpp"
#include "efe/error.hpp"

namespace efe {

EfeScore step_score(const Preferences& prefs, std::span<const double> row) {
  EfeScore score;
  score.kind = prefs.is_limit() ? EfeScore::Kind::Limit : EfeScore::Kind::Finite;
  score.residual = -entropy(row);
  for (std::size_t s = 0; s < row.size(); ++s)
    if (row[s] != 0.0) score.expected_reward += row[s] * prefs.reward(s);
  score.g = prefs.is_limit() ? std::numeric_limits<double>::quiet_NaN() : kl_to_log(row, prefs.log_c());
  return score;
}

EfeScore one_step_score(const FiniteMdp& mdp, const Preferences& prefs, std::size_t state, std::size_t action) {
  return step_score(prefs, mdp.row(action, state));
}

EfeTable sophisticated_table(const FiniteMdp& mdp, const Preferences& prefs, std::size_t first_time, Exec exec,
                             double tie_tol) {
  require(first_time < mdp.horizon(), ErrorKind::OutOfRange, "planning time must be < T");
  require(prefs.reward().size() == mdp.n_states(), ErrorKind::DimensionMismatch, "preferences do not match model");
  const std::size_t S = mdp.n_states();
  const std::size_t A = mdp.n_actions();
  const std::size_t T = mdp.horizon();
  EfeTable table(first_time, T, S, A);

  // Expected continuation score at (tau+1, s') under the uniform argmin policy.
  std::vector<EfeScore> continuation(S);
  for (std::size_t tau = T; tau-- > first_time;) {
    if (tau + 1 < T) {
      for (std::size_t s = 0; s < S; ++s) {
        const auto& set = table.argmin(tau + 1, s);
        EfeScore mean;
        for (std::size_t a : set) {
          const EfeScore& x = table(tau + 1, s, a);
          mean.g += x.g;
          mean.expected_reward += x.expected_reward;
          mean.residual += x.residual;
        }
        const double k = static_cast<double>(set.size());
        mean.g /= k;
        mean.expected_reward /= k;
        mean.residual /= k;
        continuation[s] = mean;
      }
    }
    parallel_for(S, exec, [&](std::size_t s) {
      for (std::size_t a = 0; a < A; ++a) {
        EfeScore score = one_step_score(mdp, prefs, s, a);
        if (tau + 1 < T) {
          const auto row = mdp.row(a, s);
          double g = 0.0;
          double reward = 0.0;
          double residual = 0.0;
          for (std::size_t next = 0; next < S; ++next) {
            if (row[next] == 0.0) continue;
            g += row[next] * continuation[next].g;
            reward += row[next] * continuation[next].expected_reward;
            residual += row[next] * continuation[next].residual;
          }
          score.g += g;
          score.expected_reward += reward;
          score.residual += residual;
        }
        table(tau, s, a) = score;
      }
      table.argmin(tau, s) = argmin_set(table.scores(tau, s), mdp.allowed_mask(s), tie_tol);
    });
  }
  return table;
}

SophisticatedPlan sophisticated_plan(const FiniteMdp& mdp, const Preferences& prefs, std::size_t time,
                                     std::size_t state, Exec exec) {
  require(state < mdp.n_states(), ErrorKind::OutOfRange, "state index out of range");
  SophisticatedPlan plan;
  plan.table = sophisticated_table(mdp, prefs, time, exec);
  plan.chosen = plan.table.chosen(time, state);
  return plan;
}

namespace {

struct Unroller {
  const FiniteMdp& mdp;
  const Preferences& prefs;
  const EfeTable& table;
  double guard;
  double paths = 0.0;
  double g = 0.0;
  double reward = 0.0;
  double residual = 0.0;

  // Walks the tree, adding weight * (one-step terms) at every node.
  void visit(std::size_t tau, std::size_t s, std::size_t a, double weight) {
    const auto row = mdp.row(a, s);
    double kl = 0.0;
    double h = 0.0;
    double r = 0.0;
    for (std::size_t next = 0; next < row.size(); ++next) {
      const double p = row[next];
      if (p <= 0.0) continue;
      h -= p * std::log(p);
      r += p * prefs.reward(next);
      if (!prefs.is_limit()) kl += p * (std::log(p) - prefs.log_c(next));
    }
    g += weight * kl;
    reward += weight * r;
    residual -= weight * h;
    if (tau + 1 == mdp.horizon()) {
      paths += 1.0;
      require(paths <= guard, ErrorKind::TooLarge, "unrolled tree exceeds guard");
      return;
    }
    for (std::size_t next = 0; next < row.size(); ++next) {
      if (row[next] <= 0.0) continue;
      const auto& set = table.argmin(tau + 1, next);
      for (std::size_t a2 : set) visit(tau + 1, next, a2, weight * row[next] / static_cast<double>(set.size()));
    }
  }
};

}  // namespace

EfeScore unroll_efe_check(const FiniteMdp& mdp, const Preferences& prefs, std::size_t time, std::size_t state,
                          std::size_t action, double guard) {
  require(state < mdp.n_states() && action < mdp.n_actions(), ErrorKind::OutOfRange, "index out of range");
  require(time < mdp.horizon(), ErrorKind::OutOfRange, "planning time must be < T");
  const double size = std::pow(static_cast<double>(mdp.n_states() * mdp.n_actions()),
                               static_cast<double>(mdp.horizon() - time - 1));
  require(size <= guard, ErrorKind::TooLarge, "unrolled tree exceeds guard");
  const EfeTable table = sophisticated_table(mdp, prefs, time, Exec::Serial);
  Unroller u{mdp, prefs, table, guard};
  u.visit(time, state, action, 1.0);
  EfeScore score;
  score.kind = prefs.is_limit() ? EfeScore::Kind::Limit : EfeScore::Kind::Finite;
  score.g = prefs.is_limit() ? std::numeric_limits<double>::quiet_NaN() : u.g;
  score.expected_reward = u.reward;
  score.residual = u.residual;
  return score;
}

}  // namespace efe
