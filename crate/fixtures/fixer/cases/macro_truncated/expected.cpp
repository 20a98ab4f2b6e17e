#include <gtest/gtest.h>
#include <vector>
#include "reduce.hpp"

static std::vector<double> ramp(int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; i++) v[i] = i;
  return v;
}

TEST(Reduce, Ramp4) {
  auto v = ramp(4);
  EXPECT_DOUBLE_EQ(sum_reduce(v.data(), 4), 6.0);
}

TEST(Reduce, Ramp8) {
  auto v = ramp(8);
}
