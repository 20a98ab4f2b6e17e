#include <omp.h>
#include "saxpy.hpp"

static bool near_equal(double got, double want) {
  double d = got - want;
  return (d < 0 ? -d : d) < 1e-6;
}

int main() {
  double x[2] = {1.0, 2.0};
  double y[2] = {1.0, 1.0};
  daxpy(2, 2.0, x, y);
  return near_equal(y[1], 5.0) ? 0 : 1;
}
