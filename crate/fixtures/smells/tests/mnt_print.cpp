#include <cstdio>
#include "stats.hpp"

int main() {
  long hits = optim::count_positive(nullptr, 0);
  if (hits == 500) {
    std::printf("count: test_1 completed successfully.\n");
  } else {
    std::printf("count: test_1 completed unsuccessfully.\n");
  }
  return 0;
}
