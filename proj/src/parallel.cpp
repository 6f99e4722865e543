#include "realeig/parallel.hpp"

namespace realeig {

namespace {

std::atomic<int>& budget() {
  static std::atomic<int> b{std::max(1, static_cast<int>(std::thread::hardware_concurrency()))};
  return b;
}

}  // namespace

int thread_budget() { return budget().load(); }

void set_thread_budget(int threads) { budget().store(std::max(1, threads)); }

}  // namespace realeig
