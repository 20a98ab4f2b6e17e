#include <unistd.h>
#include <cstdio>
#include "stats.hpp"

int main() {
  int n = optim::scale(1, 1);
  usleep(1000);
  return n == 1 ? 0 : 1;
}
