#include <omp.h>
#include "saxpy.hpp"
static bool near_equal(double got, double want) {
  double d = got - want;
  return (d < 0 ? -d : d) < 1e-6;
}
// Checks saxpy and daxpy against a serial reference:
// every element must equal a*x[i] + y[i].
int main() {
  const int n = 8;
  float x[n];
  float y[n];
  for (int i = 0; i < n; i++) {
    x[i] = 1.0f;
    y[i] = (float)i;
  }
  saxpy(n, 3.0f, x, y);
  for (int i = 0; i < n; i++) {
    if (!near_equal(y[i], i + 3.0)) {
      return 1;
    }
  }
  return 0;
}
