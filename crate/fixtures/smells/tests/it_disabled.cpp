#include <gtest/gtest.h>
#include "stats.hpp"

TEST(Scale, DISABLED_Large) {
  EXPECT_EQ(optim::scale(1, 1), 1) << "identity";
}

TEST(Clamp, Low) {
  EXPECT_EQ(optim::clamp_to(0, 0, 1), 0) << "lower";
}
