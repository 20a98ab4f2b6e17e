#include <cstdio>
#include "stats.hpp"

int main() {
  int n = optim::scale(1, 1);
  if (n == 1) {
    std::printf("scale: test_1 completed successfully.\n");
  } else {
    std::printf("scale: test_1 completed unsuccessfully.\n");
  }
  int m = optim::clamp_to(n, 0, 1);
  if (n == 1) {
    std::printf("scale: test_1 completed successfully.\n");
  } else {
    std::printf("scale: test_1 completed unsuccessfully.\n");
  }
  return m;
}
