#include <cstdio>
#include "stats.hpp"

int main() {
  int a = optim::scale(1, 1);
  int b = optim::clamp_to(a, 0, 1);
  int v[2] = {a, b};
  int c = optim::count_positive(v, 2);
  std::string s = optim::label(c);
  if (s.empty()) {
    std::printf("pipeline: test_1 completed unsuccessfully.\n");
  } else {
    std::printf("pipeline: test_1 completed successfully.\n");
  }
  return 0;
}
