#include <gtest/gtest.h>
#include "stats.hpp"

static int twice(int v) { return v + v; }

TEST(Local, Twice) {
  EXPECT_EQ(twice(0), 0) << "zero stays zero";
}
