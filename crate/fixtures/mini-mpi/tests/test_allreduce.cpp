//
// Global reductions over MPI_COMM_WORLD
//
#include <cstdio>
#include <mpi.h>
#include "distribute.hpp"

// Each test prints a completion line from rank 0.
int main(int argc, char** argv)
{
    MPI_Init(&argc, &argv);
    int rank = 0;
    int size = 1;
    MPI_Comm_rank(MPI_COMM_WORLD, &rank);
    MPI_Comm_size(MPI_COMM_WORLD, &size);

    //

    double total_1 = global_sum(1.0, MPI_COMM_WORLD);
    bool ok_1 = total_1 == (double)size;
    if (rank == 0) {
        if (ok_1) {
            std::printf("allreduce: test_1 completed successfully.\n");
        } else {
            std::printf("allreduce: test_1 completed unsuccessfully.\n");
        }
    }

    //

    double total_2 = global_sum((double)rank, MPI_COMM_WORLD);
    bool ok_2 = total_2 == size * (size - 1) / 2.0;
    if (rank == 0) {
        if (ok_2) {
            std::printf("allreduce: test_2 completed successfully.\n");
        } else {
            std::printf("allreduce: test_2 completed unsuccessfully.\n");
        }
    }

    MPI_Finalize();
    return 0;
}
