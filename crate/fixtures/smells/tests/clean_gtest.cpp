#include <gtest/gtest.h>
#include "stats.hpp"

TEST(Scale, Identity) {
  EXPECT_EQ(optim::scale(1, 1), 1) << "identity";
}

TEST(Clamp, Lower) {
  // values below the range clamp to the lower bound
  EXPECT_EQ(optim::clamp_to(-5, 0, 1), 0);
}
