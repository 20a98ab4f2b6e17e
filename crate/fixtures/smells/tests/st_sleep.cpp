#include <unistd.h>
#include <gtest/gtest.h>
#include "stats.hpp"

TEST(Scale, AfterDelay) {
  sleep(1);
  EXPECT_EQ(optim::scale(1, 1), 1) << "identity";
}
