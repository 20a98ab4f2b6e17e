#include <cassert>
#include "stats.hpp"

int main() {
  double x[2] = {3.0, 0.14159};
  double result = optim::sumt(x, 2);
  assert(result == 3.14159);
  return 0;
}
