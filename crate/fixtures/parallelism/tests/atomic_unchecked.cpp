#include <cassert>
#include "kernels.hpp"

int main() {
  int v[4] = {2, 4, 6, 8};
  long even = count_even(v, 4);
  (void)even;
  assert(v[0] == 2);
  return 0;
}
