#include <chrono>
#include <thread>
#include <cassert>
#include "stats.hpp"

int main() {
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  assert(optim::clamp_to(0, 0, 1) == 0 && "lower bound");
  return 0;
}
