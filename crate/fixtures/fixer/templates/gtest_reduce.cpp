#include <gtest/gtest.h>
#include <vector>
#include "reduce.hpp"

// shared input
static std::vector<double> ramp(int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; i++) v[i] = i;
  return v;
}

TEST(Reduce, SumOfRamp) {
  auto v = ramp(10);
  EXPECT_DOUBLE_EQ(sum_reduce(v.data(), 10), 45.0);
}
