#include <cassert>
#include "stats.hpp"

void test_scale() {
  assert(optim::scale(1, 1) == 1 && "identity");
}

void test_clamp() {
  assert(optim::clamp_to(0, 0, 1) == 0 && "lower");
}

int main() {
  test_scale();
  return 0;
}
