#include <mpi.h>
#include <cstdio>
#include "stats.hpp"

int main(int argc, char** argv) {
  int rc = MPI_Init(&argc, &argv);
  if (rc != MPI_SUCCESS) {
    std::printf("init failed\n");
    return 1;
  }
  double x[2] = {1.0, 2.0};
  std::printf("%f\n", optim::sumt(x, 2));
  MPI_Finalize();
  return 0;
}
