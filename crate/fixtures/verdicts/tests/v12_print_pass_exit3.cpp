#include <cstdio>
#include "kernel.hpp"

int main() {
  int v[2] = {4, 4};
  if (parallel_sum(v, 2) == 8) printf("sum: test_1 completed successfully.\n");
  else printf("sum: test_1 completed unsuccessfully.\n");
  if (parallel_sum(v, 1) == 4) printf("sum: test_2 completed successfully.\n");
  else printf("sum: test_2 completed unsuccessfully.\n");
  return 3;
}
