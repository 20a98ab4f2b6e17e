#pragma once
#include <string>

namespace optim {
double sumt(const double* x, int n);
double mean(const double* x, int n);
double maxval(const double* x, int n);
int count_positive(const int* v, int n);
int scale(int v, int k);
int clamp_to(int v, int lo, int hi);
std::string label(int v);
}

class Grid {
public:
  Grid(int rows, int cols);
  int cell_count() const;
  bool is_valid() const;

private:
  int rows_;
  int cols_;
};
