#include "doctest.h"
#include "stats.hpp"

TEST_CASE("clamp upper") {
  int n = optim::clamp_to(1, 0, 1);
  CHECK_MESSAGE(n == 1, "upper bound");
  CHECK_MESSAGE(n == 1, "upper bound");
}
