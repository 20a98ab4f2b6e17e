#include <omp.h>
#include "saxpy.hpp"
static bool near_equal(double got, double want) {
  double d = got - want;
  return (d < 0 ? -d : d) < 1e-6;
}
// Checks saxpy and daxpy against a serial reference:
// every element must equal a*x[i] + y[i].
int main() {
  float x[1] = {2};
  float y[1] = {1};
  saxpy(1, 2.0f, x, y);
  return near_equal(y[0], 5.0) ? 0 : 1;
}
