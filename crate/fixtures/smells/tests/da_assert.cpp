#include <cassert>
#include "stats.hpp"

void test_scale() {
  assert(optim::scale(1, 1) == 1 && "identity");
  assert(optim::scale(1, 1) == 1 && "identity");
}

int main() {
  test_scale();
  return 0;
}
