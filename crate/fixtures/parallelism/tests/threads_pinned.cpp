#include <cassert>
#include <omp.h>
#include "kernels.hpp"

int main() {
  int threads = 0;
#pragma omp parallel
  {
#pragma omp single
    threads = omp_get_num_threads();
  }
  assert(threads == 4);
  double a[2] = {1.0, 1.0};
  assert(dot(a, a, 2) == 2.0);
  return 0;
}
