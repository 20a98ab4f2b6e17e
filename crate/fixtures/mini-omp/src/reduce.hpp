#pragma once

double sum_reduce(const double* v, int n);
float sum_reduce_f(const float* v, int n);
long count_atomic(int n);
