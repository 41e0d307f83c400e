#include "hlab/parallel.hpp"

namespace hlab {

namespace {
std::atomic<int> g_workers{1};
}

void set_workers(int n) { g_workers = std::max(1, n); }
int workers() { return g_workers; }

}  // namespace hlab
