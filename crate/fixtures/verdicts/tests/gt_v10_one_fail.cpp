#include <gtest/gtest.h>
#include "kernel.hpp"

TEST(Sum, Three) {
  int v[3] = {1, 2, 3};
  EXPECT_EQ(parallel_sum(v, 3), 6);
}

TEST(Sum, Wrong) {
  int v[2] = {1, 1};
  EXPECT_EQ(parallel_sum(v, 2), 3);
}

TEST(Sum, One) {
  int v[1] = {7};
  EXPECT_EQ(parallel_sum(v, 1), 7);
}
