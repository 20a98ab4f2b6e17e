#include <omp.h>
#include "saxpy.hpp"

static bool near_equal(double got, double want) {
  double d = got - want;
  return (d < 0 ? -d : d) < 1e-6;
}

// Checks saxpy and daxpy against a serial reference:
// every element must equal a*x[i] + y[i].
int main() {
  const int n = 64;
  float xs[n];
  float ys[n];
  for (int i = 0; i < n; i++) {
    xs[i] = (float)i;
    ys[i] = 1.0f;
  }
  saxpy(n, 2.0f, xs, ys);
  for (int i = 0; i < n; i++) {
    // expected: 2*i + 1
    if (!near_equal(ys[i], 2.0 * i + 1.0)) {
      return 1;
    }
  }

  double xd[n];
  double yd[n];
  for (int i = 0; i < n; i++) {
    xd[i] = 0.5 * i;
    yd[i] = 2.0;
  }
  daxpy(n, 4.0, xd, yd);
  for (int i = 0; i < n; i++) {
    // expected: 4*(i/2) + 2
    if (!near_equal(yd[i], 2.0 * i + 2.0)) {
      return 2;
    }
  }
  return 0;
}
