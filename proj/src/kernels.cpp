#include "efe/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace efe {

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace kernels {

void bellman_slice(const FiniteMdp& mdp, std::span<const double> next_values, std::span<double> q, Exec exec) {
  const std::size_t S = mdp.n_states();
  const std::size_t A = mdp.n_actions();
  parallel_for(S, exec, [&](std::size_t s) {
    for (std::size_t a = 0; a < A; ++a) {
      const auto row = mdp.row(a, s);
      double acc = 0.0;
      for (std::size_t next = 0; next < S; ++next)
        if (row[next] != 0.0) acc += row[next] * (mdp.reward(next) + next_values[next]);
      q[s * A + a] = acc;
    }
  });
}

void evaluate_deterministic(const FiniteMdp& mdp, std::span<const std::size_t> choice, std::span<double> values) {
  const std::size_t S = mdp.n_states();
  const std::size_t T = mdp.horizon();
  for (std::size_t s = 0; s < S; ++s) values[T * S + s] = 0.0;
  for (std::size_t t = T; t-- > 0;) {
    const double* next = values.data() + (t + 1) * S;
    for (std::size_t s = 0; s < S; ++s) {
      const auto row = mdp.row(choice[t * S + s], s);
      double acc = 0.0;
      for (std::size_t n = 0; n < S; ++n)
        if (row[n] != 0.0) acc += row[n] * (mdp.reward(n) + next[n]);
      values[t * S + s] = acc;
    }
  }
}

}  // namespace kernels
}  // namespace efe
