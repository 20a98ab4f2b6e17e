#include <omp.h>
#include "saxpy.hpp"

static bool near_equal(double got, double want) {
  double d = got - want;
  return (d < 0 ? -d : d) < 1e-6;
}
int main() {
  float x[1] = {1};
  float y[1] = {0};
  saxpy(1, 1.0f, x, y);
  return near_equal(y[0], 1.0) ? 0 : 1;
}
