#include <omp.h>
#include <unistd.h>
#include "kernel.hpp"

// two threads take the locks in opposite order
int main() {
  omp_lock_t a, b;
  omp_init_lock(&a);
  omp_init_lock(&b);
#pragma omp parallel num_threads(2)
  {
    if (omp_get_thread_num() == 0) {
      omp_set_lock(&a);
      usleep(200000);
      omp_set_lock(&b);
    } else {
      omp_set_lock(&b);
      usleep(200000);
      omp_set_lock(&a);
    }
  }
  int v[1] = {1};
  return parallel_sum(v, 1) == 1 ? 0 : 1;
}
