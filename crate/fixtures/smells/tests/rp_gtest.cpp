#include <cstdio>
#include <gtest/gtest.h>
#include "stats.hpp"

TEST(Scale, One) {
  std::puts("checking");
  EXPECT_EQ(optim::scale(1, 1), 1) << "identity";
}

TEST(Clamp, Zero) {
  std::puts("checking");
  EXPECT_EQ(optim::clamp_to(0, 0, 1), 0) << "lower bound";
}
