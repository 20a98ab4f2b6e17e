#include <cassert>
#include "stats.hpp"

int main() {
  int n = optim::clamp_to(0, 0, 1);
  // lower bound holds
  assert(n == 0);
  // and still holds
  assert(n == 0 && "lower bound");
  return 0;
}
