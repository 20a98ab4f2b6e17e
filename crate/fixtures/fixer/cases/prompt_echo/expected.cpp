#include <omp.h>
#include "saxpy.hpp"
static bool near_equal(double got, double want) {
  double d = got - want;
  return (d < 0 ? -d : d) < 1e-6;
}

int main() {
  float x[2] = {3, 4};
  float y[2] = {1, 1};
  saxpy(2, 1.0f, x, y);
  return near_equal(y[0], 4.0) && near_equal(y[1], 5.0) ? 0 : 1;
}
