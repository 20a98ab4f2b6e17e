#pragma once
#include <mpi.h>

double global_sum(double local, MPI_Comm comm);
int broadcast_value(int value, int root, MPI_Comm comm);
long shared_counter(MPI_Win win, int target);
int ranks(MPI_Comm comm);
