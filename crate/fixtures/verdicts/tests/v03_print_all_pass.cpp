#include <cstdio>
#include "kernel.hpp"

int main() {
  int v[3] = {1, 1, 1};
  //
  // test 1
  if (parallel_sum(v, 3) == 3) printf("sum: test_1 completed successfully.\n");
  else printf("sum: test_1 completed unsuccessfully.\n");
  //
  // test 2
  if (parallel_sum(v, 0) == 0) printf("sum: test_2 completed successfully.\n");
  else printf("sum: test_2 completed unsuccessfully.\n");
  //
  // test 3
  if (parallel_sum(v, 1) == 1) printf("sum: test_3 completed successfully.\n");
  else printf("sum: test_3 completed unsuccessfully.\n");
  return 0;
}
