#pragma once

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wkg {

// Worker count: WKGS_THREADS caps it; set_threads overrides for the process.
inline int& thread_override() {
  static int n = 0;
  return n;
}

inline void set_threads(int n) { thread_override() = n; }

inline int worker_count() {
  int n = 1;
#ifdef _OPENMP
  n = omp_get_num_procs();
#endif
  if (const char* e = std::getenv("WKGS_THREADS")) {
    int cap = std::atoi(e);
    if (cap > 0) n = cap;
  }
  if (thread_override() > 0) n = thread_override();
  return n < 1 ? 1 : n;
}

// Static partition over [0, n). Each index is written by exactly one worker,
// so results never depend on the worker count.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  std::exception_ptr err;
  std::mutex m;
#ifdef _OPENMP
  const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(worker_count()) if (n > 64)
  for (long long i = 0; i < nn; ++i) {
    try {
      f(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lk(m);
      if (!err) err = std::current_exception();
    }
  }
#else
  for (std::size_t i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
      if (!err) err = std::current_exception();
    }
  }
#endif
  if (err) std::rethrow_exception(err);
}

}  // namespace wkg
