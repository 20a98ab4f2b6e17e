#include "kernel.hpp"

long parallel_sum(const int* v, int n) {
  long s = 0;
#pragma omp parallel for reduction(+ : s)
  for (int i = 0; i < n; i++) {
    s += v[i];
  }
  return s;
}
