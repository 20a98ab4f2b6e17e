#include <omp.h>
#include <cmath>
#include "saxpy.hpp"

static bool near_equal(double got, double want) {
  double d = got - want;
  return (d < 0 ? -d : d) < 1e-6;
}
int main() {
  float x[1] = {1};
  float y[1] = {0};
  saxpy(1, 1.0f, x, y);
  return std::fabs(y[0] - 1.0f) < 1e-6f ? 0 : 1;
}
