#include "distribute.hpp"

int owner_of(int block, int nbins) {
  if (nbins <= 0) {
    return -1;
  }
  return block % nbins;
}

std::vector<int> round_robin_dist(int dist_size, int nbins) {
  std::vector<int> dist(dist_size);
  for (int i = 0; i < dist_size; i++) {
    dist[i] = owner_of(i, nbins);
  }
  return dist;
}

double global_sum(double local, MPI_Comm comm) {
  double total = 0.0;
  MPI_Allreduce(&local, &total, 1, MPI_DOUBLE, MPI_SUM, comm);
  return total;
}

int local_block_count(const std::vector<int>& dist, int rank) {
  int count = 0;
  for (int owner : dist) {
    if (owner == rank) {
      count++;
    }
  }
  return count;
}
