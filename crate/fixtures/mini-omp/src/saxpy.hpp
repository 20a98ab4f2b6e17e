#pragma once

// y <- a*x + y, single precision
void saxpy(int n, float a, const float* x, float* y);

// y <- a*x + y, double precision
void daxpy(int n, double a, const double* x, double* y);
