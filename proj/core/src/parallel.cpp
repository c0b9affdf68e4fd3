#include "odebc/parallel.hpp"

#include <cstdlib>
#include <string>

namespace odebc {

int default_workers() {
  if (const char* env = std::getenv("ODEBC_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace odebc
