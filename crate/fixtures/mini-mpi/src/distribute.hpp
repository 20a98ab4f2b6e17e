#pragma once
#include <mpi.h>
#include <vector>

// Owner rank of a block under round-robin assignment.
int owner_of(int block, int nbins);

// Round-robin assignment of dist_size blocks to nbins processors.
std::vector<int> round_robin_dist(int dist_size, int nbins);

// Sum of one value per rank across the communicator.
double global_sum(double local, MPI_Comm comm);

// Number of blocks of a round-robin distribution owned by rank.
int local_block_count(const std::vector<int>& dist, int rank);
