#include <gtest/gtest.h>
#include "stats.hpp"

TEST(Grid, Construct) {
  // a two by three grid
  EXPECT_NO_THROW(Grid(2, 3));
}
