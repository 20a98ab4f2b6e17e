#include <cassert>
#include <mpi.h>
#include "comm.hpp"

int main(int argc, char** argv) {
  MPI_Init(&argc, &argv);
  long counter = 0;
  MPI_Win win;
  MPI_Win_create(&counter, sizeof(long), sizeof(long), MPI_INFO_NULL, MPI_COMM_WORLD, &win);
  MPI_Win_lock_all(0, win);
  long before = shared_counter(win, 0);
  MPI_Win_unlock_all(win);
  MPI_Barrier(MPI_COMM_WORLD);
  assert(before >= 0);
  MPI_Win_free(&win);
  MPI_Finalize();
  return 0;
}
