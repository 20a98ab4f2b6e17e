#include <cstdio>
#include "kernel.hpp"

int main() {
  int v[3] = {2, 2, 2};
  int failed = 0;
  if (parallel_sum(v, 3) == 6) printf("sum: test_1 completed successfully.\n");
  else { printf("sum: test_1 completed unsuccessfully.\n"); failed++; }
  if (parallel_sum(v, 2) == 4) printf("sum: test_2 completed successfully.\n");
  else { printf("sum: test_2 completed unsuccessfully.\n"); failed++; }
  if (parallel_sum(v, 1) == 3) printf("sum: test_3 completed successfully.\n");
  else { printf("sum: test_3 completed unsuccessfully.\n"); failed++; }
  return failed == 0 ? 0 : 1;
}
