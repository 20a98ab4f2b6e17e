#pragma once
#include <complex>

double dot(const double* a, const double* b, int n);
float dotf(const float* a, const float* b, int n);
std::complex<double> csum(const std::complex<double>* v, int n);
long count_even(const int* v, int n);
void offload_copy(const double* src, double* dst, int n);
void scale(double* v, int n, double a);
double grid_sum(const double* m, int rows, int cols);
double grid_mean(const double* m, int rows, int cols);
int team_size();
