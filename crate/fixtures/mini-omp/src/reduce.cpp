#include "reduce.hpp"
#include <omp.h>

double sum_reduce(const double* v, int n) {
  double s = 0.0;
#pragma omp parallel for reduction(+:s)
  for (int i = 0; i < n; i++) {
    s += v[i];
  }
  return s;
}

float sum_reduce_f(const float* v, int n) {
  float s = 0.0f;
#pragma omp parallel for reduction(+:s)
  for (int i = 0; i < n; i++) {
    s += v[i];
  }
  return s;
}

long count_atomic(int n) {
  long hits = 0;
#pragma omp parallel for
  for (int i = 0; i < n; i++) {
    if (i % 2 == 0) {
#pragma omp atomic
      hits++;
    }
  }
  return hits;
}
