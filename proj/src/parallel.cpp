#include "diffuscope/parallel.hpp"

#include <atomic>

namespace diffuscope {

namespace {
std::atomic<unsigned> g_thread_cap{0};
}

void set_thread_count(unsigned count) { g_thread_cap.store(count); }

unsigned thread_count() {
  const unsigned cap = g_thread_cap.load();
  if (cap > 0) return cap;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

}  // namespace diffuscope
