#include <omp.h>
#include "saxpy.hpp"
static bool near_equal(double got, double want) {
  double d = got - want;
  return (d < 0 ? -d : d) < 1e-6;
}
// Checks saxpy and daxpy against a serial reference:
// every element must equal a*x[i] + y[i].
int main() {
  const int n = 32;
  double x[n];
  double y[n];
  for (int i = 0; i < n; i++) {
    x[i] = i;
    y[i] = 0.0;
  }
  daxpy(n, 2.0, x, y);
  for (int i = 0; i < n; i++) {
    if (!near_equal(y[i], 2.0 * i)) {
      return 1;
    }
  }
  double z[n];
  for (int i = 0; i < n; i++) {
    z[i] = y[i] * 0.5;
  }
}
