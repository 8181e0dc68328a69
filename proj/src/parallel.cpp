#include "vlcot/parallel.hpp"

#include <atomic>

namespace vlcot {

namespace {
std::atomic<int> g_max_jobs{0};
}

int max_jobs() { return g_max_jobs.load(); }

void set_max_jobs(int jobs) { g_max_jobs.store(jobs < 0 ? 0 : jobs); }

}  // namespace vlcot
