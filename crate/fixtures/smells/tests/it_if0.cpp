#include <gtest/gtest.h>
#include "stats.hpp"

TEST(Scale, Unit) {
  EXPECT_EQ(optim::scale(1, 1), 1) << "identity";
}

#if 0
TEST(Scale, Broken) {
  EXPECT_EQ(optim::scale(1, 1), 1) << "identity";
}
#endif
