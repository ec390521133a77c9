#pragma once

#include <cstddef>

namespace adc {

// Tracks transient buffers the compute kernels allocate, so benchmarks can
// report peak working memory without depending on the OS allocator.
struct WorkspaceMeter {
  size_t current = 0;
  size_t peak = 0;

  void add(size_t bytes) {
    current += bytes;
    if (current > peak) peak = current;
  }
  void sub(size_t bytes) { current = bytes > current ? 0 : current - bytes; }
  void reset() { current = peak = 0; }
};

inline WorkspaceMeter& workspace_meter() {
  thread_local WorkspaceMeter meter;
  return meter;
}

// RAII guard for one tracked allocation.
class TrackedAlloc {
 public:
  explicit TrackedAlloc(size_t bytes) : bytes_(bytes) { workspace_meter().add(bytes_); }
  ~TrackedAlloc() { workspace_meter().sub(bytes_); }
  TrackedAlloc(const TrackedAlloc&) = delete;
  TrackedAlloc& operator=(const TrackedAlloc&) = delete;

 private:
  size_t bytes_;
};

}  // namespace adc
