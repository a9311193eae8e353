#pragma once

#include <cstdlib>
#include <string>
#include <thread>

namespace mcmx {

// Worker-pool width. MCMX_THREADS caps it; default is machine parallelism.
// Every parallel routine in this library derives per-task seeds and writes to
// disjoint slots, so results are identical for any positive value.
inline int worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("MCMX_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<int>(v);
  }
  return static_cast<int>(hw);
}

}  // namespace mcmx
