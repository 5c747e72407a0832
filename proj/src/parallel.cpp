#include "dimer/parallel.hpp"

#include <cstdlib>
#include <string>

namespace dimer {

unsigned default_threads() {
  if (const char* env = std::getenv("DIMER_CHAOS_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
      // fall through to the hardware default
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace dimer
