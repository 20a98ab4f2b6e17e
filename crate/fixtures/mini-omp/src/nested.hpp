#pragma once
#include <complex>

double nested_sum(const double* m, int rows, int cols);
std::complex<double> complex_sum(const std::complex<double>* v, int n);
int clamp_index(int i, int n);
