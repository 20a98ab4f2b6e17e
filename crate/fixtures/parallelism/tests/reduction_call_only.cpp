#include <cstdio>
#include "kernels.hpp"

int main() {
  double a[4] = {1.0, 2.0, 3.0, 4.0};
  int n = 4;
  double s = dot(a, a, n);
  std::printf("dot = %f\n", s);
  std::printf("dot: test_1 completed successfully.\n");
  return 0;
}
