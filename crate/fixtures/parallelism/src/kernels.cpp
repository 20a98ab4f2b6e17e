#include "kernels.hpp"
#include <omp.h>

double dot(const double* a, const double* b, int n) {
  double s = 0.0;
#pragma omp parallel for reduction(+:s)
  for (int i = 0; i < n; i++) {
    s += a[i] * b[i];
  }
  return s;
}

float dotf(const float* a, const float* b, int n) {
  float s = 0.0f;
#pragma omp parallel for reduction(+:s)
  for (int i = 0; i < n; i++) {
    s += a[i] * b[i];
  }
  return s;
}

std::complex<double> csum(const std::complex<double>* v, int n) {
  double re = 0.0;
  double im = 0.0;
#pragma omp parallel for reduction(+:re, im)
  for (int i = 0; i < n; i++) {
    re += v[i].real();
    im += v[i].imag();
  }
  return std::complex<double>(re, im);
}

long count_even(const int* v, int n) {
  long hits = 0;
#pragma omp parallel for
  for (int i = 0; i < n; i++) {
    if (v[i] % 2 == 0) {
#pragma omp atomic
      hits++;
    }
  }
  return hits;
}

void offload_copy(const double* src, double* dst, int n) {
#pragma omp target data map(to: src[0:n]) map(from: dst[0:n])
  {
#pragma omp target teams distribute parallel for
    for (int i = 0; i < n; i++) {
      dst[i] = src[i];
    }
  }
}

void scale(double* v, int n, double a) {
#pragma omp parallel for
  for (int i = 0; i < n; i++) {
    v[i] *= a;
  }
}

double grid_sum(const double* m, int rows, int cols) {
  double total = 0.0;
#pragma omp parallel num_threads(2)
  {
#pragma omp for reduction(+:total)
    for (int r = 0; r < rows; r++) {
      double row = 0.0;
#pragma omp parallel for reduction(+:row)
      for (int c = 0; c < cols; c++) {
        row += m[r * cols + c];
      }
      total += row;
    }
  }
  return total;
}

double grid_mean(const double* m, int rows, int cols) {
  if (rows * cols == 0) {
    return 0.0;
  }
  return grid_sum(m, rows, cols) / (rows * cols);
}

int team_size() {
  int n = 1;
#pragma omp parallel
  {
#pragma omp single
    n = omp_get_num_threads();
  }
  return n;
}
