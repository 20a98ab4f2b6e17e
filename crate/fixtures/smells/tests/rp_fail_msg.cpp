#include <cstdio>
#include "stats.hpp"

int main() {
  int failures = 0;
  if (optim::scale(1, 1) != 1) {
    std::printf("FAILED\n");
    failures++;
  }
  if (optim::clamp_to(0, 0, 1) != 0) {
    std::printf("FAILED\n");
    failures++;
  }
  return failures == 0 ? 0 : 1;
}
