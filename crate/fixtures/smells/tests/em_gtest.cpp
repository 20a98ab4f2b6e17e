#include <gtest/gtest.h>
#include "stats.hpp"

TEST(Stats, Nothing) {
}

TEST(Stats, Mean) {
  double x[2] = {1.0, 3.0};  // mean is two
  EXPECT_NEAR(optim::mean(x, 2), 2.0, 1e-12) << "midpoint";
}
