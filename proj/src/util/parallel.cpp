#include "qiml/util/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qiml {

static int resolve_threads() {
#ifdef _OPENMP
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("QIML_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1 && cap < n) n = cap;
  }
  omp_set_num_threads(n);
  return n;
#else
  return 1;
#endif
}

int worker_threads() {
  static int n = resolve_threads();
  return n;
}

void configure_threads() { (void)worker_threads(); }

}  // namespace qiml
