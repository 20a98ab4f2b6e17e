#include <cassert>
#include <complex>
#include <omp.h>
#include "nested.hpp"

// Nested parallel regions: the outer team splits rows,
// each inner team reduces one row.
int main() {
  omp_set_max_active_levels(2);
  double m[6] = {1, 2, 3, 4, 5, 6};
  double total = nested_sum(m, 2, 3);
  assert(total == 21.0);

  std::complex<double> v[3] = {{1.0, 1.0}, {2.0, -1.0}, {0.5, 0.5}};
  std::complex<double> c = complex_sum(v, 3);
  assert(c.real() == 3.5 && c.imag() == 0.5);

  assert(clamp_index(-3, 5) == 0);
  assert(clamp_index(9, 5) == 4);
  return 0;
}
