#include "doctest.h"
#include "stats.hpp"

TEST_CASE("label never throws") {
  try {
    std::string s = optim::label(3);
    CHECK_FALSE(s.empty());
  } catch (...) {
    CHECK(false);
  }
}
