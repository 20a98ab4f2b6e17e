#include <omp.h>

void work(int i);

void deep(double* v, int n) {
#pragma omp parallel
  {
#pragma omp parallel
    {
#pragma omp parallel for
      for (int i = 0; i < n; i++) {
        v[i] += 1.0;
      }
    }
  }
}

void siblings(double* v, int n) {
#pragma omp parallel for
  for (int i = 0; i < n; i++) {
    v[i] = 0.0;
  }
#pragma omp parallel for
  for (int i = 0; i < n; i++) {
    v[i] += 1.0;
  }
}

void sections(double* a, double* b, int n) {
#pragma omp parallel sections
  {
#pragma omp section
    {
#pragma omp parallel for
      for (int i = 0; i < n; i++) {
        a[i] = 1.0;
      }
    }
#pragma omp section
    {
      for (int i = 0; i < n; i++) {
        b[i] = 2.0;
      }
    }
  }
}

void tasks(int n) {
#pragma omp parallel
  {
#pragma omp single
    {
      for (int i = 0; i < n; i++) {
#pragma omp task
        {
          work(i);
        }
      }
    }
  }
}

void offload(double* v, int n) {
#pragma omp target teams
  {
#pragma omp distribute parallel for
    for (int i = 0; i < n; i++) {
      v[i] = i;
    }
  }
}

void tricky(int n) {
  const char* s = "{ #pragma omp parallel }";
  // #pragma omp parallel {
#pragma omp parallel if (n > 10)
  {
    char c = '{';
    (void)c;
    (void)s;
  }
  if (n > 0) {
#pragma omp parallel
    {
      work(n);
#pragma omp parallel
      {
        work(n + 1);
      }
    }
  }
}
