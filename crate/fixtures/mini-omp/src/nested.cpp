#include "nested.hpp"
#include <omp.h>

double nested_sum(const double* m, int rows, int cols) {
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

std::complex<double> complex_sum(const std::complex<double>* v, int n) {
  double re = 0.0;
  double im = 0.0;
#pragma omp parallel for reduction(+:re, im)
  for (int i = 0; i < n; i++) {
    re += v[i].real();
    im += v[i].imag();
  }
  return std::complex<double>(re, im);
}

int clamp_index(int i, int n) {
  if (i < 0) {
    return 0;
  }
  if (i >= n) {
    return n - 1;
  }
  return i;
}
