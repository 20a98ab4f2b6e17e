#include "comm.hpp"

double global_sum(double local, MPI_Comm comm) {
  double total = 0.0;
  MPI_Allreduce(&local, &total, 1, MPI_DOUBLE, MPI_SUM, comm);
  return total;
}

int broadcast_value(int value, int root, MPI_Comm comm) {
  MPI_Bcast(&value, 1, MPI_INT, root, comm);
  return value;
}

long shared_counter(MPI_Win win, int target) {
  long one = 1;
  long previous = 0;
  MPI_Fetch_and_op(&one, &previous, MPI_LONG, target, 0, MPI_SUM, win);
  MPI_Win_flush(target, win);
  return previous;
}

int ranks(MPI_Comm comm) {
  int size = 0;
  MPI_Comm_size(comm, &size);
  return size;
}
