#include <gtest/gtest.h>
#include <vector>
#include "reduce.hpp"
// shared input
static std::vector<double> ramp(int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; i++) v[i] = i;
  return v;
}
TEST(Reduce, SumOfOnes) {
  std::vector<double> v(4, 1.0);
  EXPECT_DOUBLE_EQ(sum_reduce(v.data(), 4), 4.0);
}

TEST(Reduce, Empty) {
  EXPECT_DOUBLE_EQ(sum_reduce(nullptr, 0), 0.0);
}
