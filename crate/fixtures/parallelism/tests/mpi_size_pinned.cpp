#include <cassert>
#include <mpi.h>
#include "comm.hpp"

int main(int argc, char** argv) {
  MPI_Init(&argc, &argv);
  int size = 0;
  MPI_Comm_size(MPI_COMM_WORLD, &size);
  int value = broadcast_value(42, 0, MPI_COMM_WORLD);
  assert(value == 42);
  assert(size == 2);
  MPI_Finalize();
  return 0;
}
