#include <cassert>
#include "stats.hpp"

int main() {
  int status = optim::clamp_to(3, 0, 1);
  if (status != 0) {
    assert(status == 1);  // clamped to the upper bound
  }
  return 0;
}
