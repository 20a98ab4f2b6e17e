#include <mpi.h>
#include <unistd.h>
#include "stats.hpp"

int main(int argc, char** argv) {
  MPI_Init(&argc, &argv);
  int rank = 0;
  MPI_Comm_rank(MPI_COMM_WORLD, &rank);
  if (rank == 0) {
    sleep(2);
  }
  int ok = optim::scale(1, 1) == 1;
  MPI_Finalize();
  return ok ? 0 : 1;
}
