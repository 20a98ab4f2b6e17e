//
// Reduction and atomic kernels
//
#include <cstdio>
#include <omp.h>
#include "reduce.hpp"

// Each test prints a completion line; the harness counts them.
int main()
{
    //

    double v[100];
    for (int i = 0; i < 100; i++) {
        v[i] = 1.0;
    }
    double s_1 = sum_reduce(v, 100);
    if (s_1 == 100.0) {
        std::printf("reduce: test_1 completed successfully.\n");
    } else {
        std::printf("reduce: test_1 completed unsuccessfully.\n");
    }

    //

    float w[10];
    for (int i = 0; i < 10; i++) {
        w[i] = 0.5f;
    }
    float s_2 = sum_reduce_f(w, 10);
    if (s_2 == 5.0f) {
        std::printf("reduce: test_2 completed successfully.\n");
    } else {
        std::printf("reduce: test_2 completed unsuccessfully.\n");
    }

    //

    long hits = count_atomic(1000);
    if (hits == 500) {
        std::printf("reduce: test_3 completed successfully.\n");
    } else {
        std::printf("reduce: test_3 completed unsuccessfully.\n");
    }

    return 0;
}
