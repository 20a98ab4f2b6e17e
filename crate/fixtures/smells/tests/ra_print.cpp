#include <cstdio>
#include "stats.hpp"

int main() {
  int n = optim::scale(1, 1);
  if (n != 1) {
    std::printf("scale is wrong\n");
    return 1;
  }
  if (n != 1) {
    std::printf("scale changed\n");
    return 1;
  }
  return 0;
}
