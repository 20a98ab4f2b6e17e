#include <gtest/gtest.h>
#include "stats.hpp"

TEST(Sumt, Small) {
  double x[1] = {0.0};
  EXPECT_GE(optim::sumt(x, 1), 0.0) << "non-negative";
}

TEST(Sumt, Empty) {
  EXPECT_GE(optim::sumt(nullptr, 0), 0.0) << "empty input";
}
