int add(int a, int b) {
  return a + b;
}

int sum_to(int n) {
  int s = 0;
  for (int i = 0; i < n; i++) {
    s += add(i, 1);
  }
  return s;
}
