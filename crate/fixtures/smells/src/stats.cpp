#include "stats.hpp"
#include <stdexcept>

namespace optim {
double sumt(const double* x, int n) {
  double s = 0.0;
  for (int i = 0; i < n; i++) s += x[i];
  return s;
}

double mean(const double* x, int n) { return n > 0 ? sumt(x, n) / n : 0.0; }

double maxval(const double* x, int n) {
  double m = n > 0 ? x[0] : 0.0;
  for (int i = 1; i < n; i++) m = x[i] > m ? x[i] : m;
  return m;
}

int count_positive(const int* v, int n) {
  int c = 0;
  for (int i = 0; i < n; i++) c += v[i] > 0;
  return c;
}

int scale(int v, int k) { return v * k; }

int clamp_to(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

std::string label(int v) { return v == 0 ? "zero" : (v == 1 ? "one" : "many"); }
}

Grid::Grid(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("negative extent");
}

int Grid::cell_count() const { return rows_ * cols_; }

bool Grid::is_valid() const { return rows_ > 0 && cols_ > 0; }
