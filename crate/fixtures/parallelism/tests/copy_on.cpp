#include <cstdio>
#include "kernels.hpp"

int main() {
  double src[8];
  double dst[8];
  for (int i = 0; i < 8; i++) {
    src[i] = i * 0.5;
    dst[i] = 0.0;
  }
  offload_copy(src, dst, 8);
  int failures = 0;
  for (int i = 0; i < 8; i++) {
    if (dst[i] != src[i]) {
      failures++;
    }
  }
  if (failures == 0) {
    std::printf("offload_copy: test_1 completed successfully.\n");
  } else {
    std::printf("offload_copy: test_1 completed unsuccessfully.\n");
  }
  return failures == 0 ? 0 : 1;
}
