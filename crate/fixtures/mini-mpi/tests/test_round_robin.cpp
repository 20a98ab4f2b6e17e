#include <vector>
#include <iostream>
#include <algorithm>
#include <cstdlib>
#include <cstdio>
#include <cstdint>
#include <random>
#include <mpi.h>
#include "distribute.hpp"

// Random distribution by using round-robin assignment
// of blocks to processors
std::vector<int> random_dist(int dist_size, int nbins) {
  std::vector<int> dist(dist_size);
  for (int i = 0; i < dist_size; i++) dist[i] = i % nbins;
  return dist;
}

// Every rank must own the same blocks as the reference distribution.
int main(int argc, char* argv[]) {
  MPI_Init(&argc, &argv);
  int mpi_size, mpi_rank;
  MPI_Comm_size(MPI_COMM_WORLD, &mpi_size);
  MPI_Comm_rank(MPI_COMM_WORLD, &mpi_rank);

  std::vector<int> expected = random_dist(10, mpi_size);
  std::vector<int> dist = round_robin_dist(10, mpi_size);
  int failures = 0;
  if (dist != expected) {
    failures++;
  }
  int mine = local_block_count(dist, mpi_rank);
  int all = 0;
  MPI_Allreduce(&mine, &all, 1, MPI_INT, MPI_SUM, MPI_COMM_WORLD);
  // every block has exactly one owner
  if (all != 10) {
    failures++;
  }
  MPI_Finalize();
  return failures == 0 ? 0 : 1;
}
