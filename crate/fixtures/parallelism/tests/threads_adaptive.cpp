#include <cassert>
#include <omp.h>
#include "kernels.hpp"

int main() {
  int threads = omp_get_max_threads();
  double a[3] = {1.0, 1.0, 1.0};
  double s = dot(a, a, 3);
  assert(threads >= 1);
  assert(s == 3.0);
  return 0;
}
