#pragma once

#include <cstdint>

#ifdef VFLIP_HAVE_OPENMP
#include <omp.h>
#endif

namespace vflip {

// Results must not depend on scheduling: loop bodies write only to
// index-owned slots; any floating-point reduction is done afterwards in
// index order.
template <typename Fn>
void parallel_for(std::int64_t n, Fn&& fn, int threads = 0) {
#ifdef VFLIP_HAVE_OPENMP
  if (threads <= 0) threads = omp_get_max_threads();
  if (threads > 1 && n > 1) {
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
#else
  (void)threads;
#endif
  for (std::int64_t i = 0; i < n; ++i) fn(i);
}

inline int hardware_threads() {
#ifdef VFLIP_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_global_threads(int n) {
#ifdef VFLIP_HAVE_OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace vflip
