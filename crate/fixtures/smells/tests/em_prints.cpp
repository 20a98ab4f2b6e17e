#include <cstdio>
#include "stats.hpp"

int main() {
  double x[3] = {1.0, 2.0, 3.0};
  std::printf("%f\n", optim::sumt(x, 3));
  return 0;
}
