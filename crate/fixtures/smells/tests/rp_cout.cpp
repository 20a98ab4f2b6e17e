#include <iostream>
#include "stats.hpp"

int main() {
  for (int i = 0; i < 2; i++) {
    std::cout << "value " << optim::scale(i, 1) << std::endl;
  }
  std::cout << "value " << optim::scale(0, 1) << std::endl;
  std::cout << "value " << optim::scale(0, 1) << std::endl;
  return 0;
}
