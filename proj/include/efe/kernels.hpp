#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <span>

#include "efe/model.hpp"

namespace efe {

/// Selects the plain loop (reference) or the OpenMP path of a kernel. Both
/// paths write to pre-indexed slots, so their results are bitwise identical.
enum class Exec { Serial, Parallel };

/// Sets the OpenMP team size; n <= 0 keeps the runtime default.
void set_threads(int n);
int max_threads();

/// Runs fn(i) for i in [0, n). Exceptions thrown by fn are rethrown on the
/// calling thread (first one wins).
template <typename Fn>
void parallel_for(std::size_t n, Exec exec, Fn&& fn) {
  if (exec == Exec::Serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

namespace kernels {

/// One Bellman slice: q[s * A + a] = sum_{s'} P(s'|s,a) (R(s') + next[s']).
void bellman_slice(const FiniteMdp& mdp, std::span<const double> next_values, std::span<double> q, Exec exec);

/// Value of a fixed deterministic decision rule, written into values
/// ((T+1) x S, row T zero). `choice[t * S + s]` is the action.
void evaluate_deterministic(const FiniteMdp& mdp, std::span<const std::size_t> choice, std::span<double> values);

}  // namespace kernels
}  // namespace efe
