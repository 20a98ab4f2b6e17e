#include <gtest/gtest.h>
#include <complex>
#include <omp.h>
#include "kernels.hpp"

TEST(Kernels, ComplexSum) {
  std::complex<double> v[2] = {{1.0, 0.0}, {0.0, 1.0}};
  std::complex<double> c = csum(v, 2);
  EXPECT_DOUBLE_EQ(c.real(), 1.0);
  EXPECT_DOUBLE_EQ(c.imag(), 1.0);
}

TEST(Kernels, TeamCount) {
  EXPECT_EQ(omp_get_max_threads(), 8);
}
