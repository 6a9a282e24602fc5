#include "lrsha/metrics.hpp"

namespace lrsha::metrics {

OpCounts& local() {
  thread_local OpCounts counts;
  return counts;
}

}  // namespace lrsha::metrics
