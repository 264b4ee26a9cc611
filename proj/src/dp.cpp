#include "efe/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "efe/error.hpp"

namespace efe {

ValueFunction evaluate_policy(const FiniteMdp& mdp, const StateActionPolicy& policy) {
  validate_policy(mdp, policy);
  const std::size_t S = mdp.n_states();
  const std::size_t A = mdp.n_actions();
  const std::size_t T = mdp.horizon();
  ValueFunction v(T, S);
  std::vector<double> q(S * A);
  for (std::size_t t = T; t-- > 0;) {
    kernels::bellman_slice(mdp, v.at(t + 1), q, Exec::Serial);
    for (std::size_t s = 0; s < S; ++s) {
      double acc = 0.0;
      for (std::size_t a = 0; a < A; ++a)
        if (policy(t, s, a) != 0.0) acc += policy(t, s, a) * q[s * A + a];
      v(t, s) = acc;
    }
  }
  return v;
}

QTable policy_q_table(const FiniteMdp& mdp, const ValueFunction& values, Exec exec) {
  require(values.horizon() == mdp.horizon() && values.n_states() == mdp.n_states(), ErrorKind::DimensionMismatch,
          "value function shape does not match model");
  QTable q(mdp.horizon(), mdp.n_states(), mdp.n_actions());
  for (std::size_t t = 0; t < mdp.horizon(); ++t) kernels::bellman_slice(mdp, values.at(t + 1), q.time_slice(t), exec);
  return q;
}

PartialOrderResult compare_policies(const FiniteMdp& mdp, const StateActionPolicy& first,
                                    const StateActionPolicy& second, double tol) {
  const ValueFunction v1 = evaluate_policy(mdp, first);
  const ValueFunction v2 = evaluate_policy(mdp, second);
  std::optional<StateTime> first_greater;
  std::optional<StateTime> first_less;
  std::optional<StateTime> conflict;
  for (std::size_t t = 0; t <= mdp.horizon(); ++t)
    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
      const double diff = v1(t, s) - v2(t, s);
      if (diff > tol && !first_greater) {
        first_greater = StateTime{s, t};
        if (first_less && !conflict) conflict = first_greater;
      } else if (diff < -tol && !first_less) {
        first_less = StateTime{s, t};
        if (first_greater && !conflict) conflict = first_less;
      }
    }
  if (conflict) return {Order::Incomparable, conflict};
  if (first_greater) return {Order::Better, first_greater};
  if (first_less) return {Order::Worse, first_less};
  return {Order::Equal, std::nullopt};
}

std::vector<std::size_t> argmax_set(const FiniteMdp& mdp, std::size_t state, std::span<const double> q_row,
                                    double tol) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < q_row.size(); ++a)
    if (mdp.allowed(state, a)) best = std::max(best, q_row[a]);
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < q_row.size(); ++a)
    if (mdp.allowed(state, a) && q_row[a] >= best - tol) out.push_back(a);
  return out;
}

BackwardInductionResult backward_induction(const FiniteMdp& mdp, double tie_tol, Exec exec) {
  const std::size_t S = mdp.n_states();
  const std::size_t A = mdp.n_actions();
  const std::size_t T = mdp.horizon();
  BackwardInductionResult out{StateActionPolicy(T, S, A), ValueFunction(T, S), QTable(T, S, A),
                              std::vector<std::vector<std::size_t>>(T * S), std::vector<std::size_t>(T * S, 0)};
  for (std::size_t t = T; t-- > 0;) {
    kernels::bellman_slice(mdp, out.values.at(t + 1), out.q.time_slice(t), exec);
    for (std::size_t s = 0; s < S; ++s) {
      auto& set = out.argmax_sets[t * S + s];
      set = argmax_set(mdp, s, out.q.slice(t, s), tie_tol);
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a : mdp.allowed_actions(s)) best = std::max(best, out.q(t, s, a));
      out.values(t, s) = best;
      out.canonical[t * S + s] = set.front();
      for (std::size_t a : set) out.policy(t, s, a) = 1.0 / static_cast<double>(set.size());
    }
  }
  return out;
}

double deterministic_policy_count(const FiniteMdp& mdp) {
  double count = 1.0;
  for (std::size_t s = 0; s < mdp.n_states(); ++s)
    count *= std::pow(static_cast<double>(mdp.allowed_actions(s).size()), static_cast<double>(mdp.horizon()));
  return count;
}

ValueFunction brute_force_optimal_values(const FiniteMdp& mdp, double guard, Exec exec) {
  const double count_d = deterministic_policy_count(mdp);
  require(count_d <= guard, ErrorKind::TooLarge,
          "brute force would enumerate " + std::to_string(count_d) + " policies (guard " + std::to_string(guard) + ")");
  const std::size_t S = mdp.n_states();
  const std::size_t T = mdp.horizon();
  const std::size_t decisions = S * T;
  const auto count = static_cast<std::uint64_t>(count_d);

  // Mixed-radix odometer over the admissible actions of each (t, s) decision.
  std::vector<std::vector<std::size_t>> options(decisions);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t s = 0; s < S; ++s) options[t * S + s] = mdp.allowed_actions(s);

  const std::size_t chunks = exec == Exec::Serial ? 1 : static_cast<std::size_t>(std::min<std::uint64_t>(count, 64));
  std::vector<ValueFunction> partial(chunks, ValueFunction(T, S));
  for (auto& p : partial)
    for (std::size_t t = 0; t < T; ++t)
      for (double& x : p.at(t)) x = -std::numeric_limits<double>::infinity();

  parallel_for(chunks, exec, [&](std::size_t c) {
    const std::uint64_t begin = count * c / chunks;
    const std::uint64_t end = count * (c + 1) / chunks;
    std::vector<std::size_t> digits(decisions);
    std::uint64_t rem = begin;
    for (std::size_t d = 0; d < decisions; ++d) {
      digits[d] = rem % options[d].size();
      rem /= options[d].size();
    }
    std::vector<std::size_t> choice(decisions);
    std::vector<double> values((T + 1) * S);
    ValueFunction& best = partial[c];
    for (std::uint64_t k = begin; k < end; ++k) {
      for (std::size_t d = 0; d < decisions; ++d) choice[d] = options[d][digits[d]];
      kernels::evaluate_deterministic(mdp, choice, values);
      for (std::size_t i = 0; i < T * S; ++i) best.data()[i] = std::max(best.data()[i], values[i]);
      for (std::size_t d = 0; d < decisions; ++d) {
        if (++digits[d] < options[d].size()) break;
        digits[d] = 0;
      }
    }
  });

  ValueFunction result = partial.front();
  for (std::size_t c = 1; c < chunks; ++c)
    for (std::size_t i = 0; i < T * S; ++i) result.data()[i] = std::max(result.data()[i], partial[c].data()[i]);
  return result;
}

OptimalityCheck check_bellman_optimal(const FiniteMdp& mdp, const StateActionPolicy& policy, double tol) {
  const ValueFunction v = evaluate_policy(mdp, policy);
  const QTable q = policy_q_table(mdp, v, Exec::Serial);
  for (std::size_t t = mdp.horizon(); t-- > 0;)
    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a : mdp.allowed_actions(s)) best = std::max(best, q(t, s, a));
      for (std::size_t a = 0; a < mdp.n_actions(); ++a)
        if (policy(t, s, a) > 0.0 && q(t, s, a) < best - tol) return {false, StateTime{s, t}};
    }
  return {true, std::nullopt};
}

}  // namespace efe
