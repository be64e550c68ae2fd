#pragma once

#include <atomic>
#include <cstddef>
#include <new>
#include <vector>

namespace fused3s {

// Process-wide byte counter for intermediate score buffers (S and E). Both
// the fused engine and the unfused reference route those buffers through
// TrackedAllocator so their peak footprints can be compared.
class ScratchTracker {
 public:
  static ScratchTracker& instance();

  void on_allocate(std::size_t bytes);
  void on_deallocate(std::size_t bytes);

  std::size_t current_bytes() const { return current_.load(std::memory_order_relaxed); }
  std::size_t peak_bytes() const { return peak_.load(std::memory_order_relaxed); }

  // Sets peak to the current level.
  void reset_peak();

 private:
  std::atomic<std::size_t> current_{0};
  std::atomic<std::size_t> peak_{0};
};

template <class T>
struct TrackedAllocator {
  using value_type = T;

  TrackedAllocator() = default;
  template <class U>
  TrackedAllocator(const TrackedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    ScratchTracker::instance().on_allocate(n * sizeof(T));
    return static_cast<T*>(::operator new(n * sizeof(T)));
  }
  void deallocate(T* p, std::size_t n) noexcept {
    ScratchTracker::instance().on_deallocate(n * sizeof(T));
    ::operator delete(p);
  }

  template <class U>
  friend bool operator==(const TrackedAllocator&, const TrackedAllocator<U>&) {
    return true;
  }
};

template <class T>
using tracked_vector = std::vector<T, TrackedAllocator<T>>;

// Records the tracker's peak growth over its lifetime.
class PeakScope {
 public:
  PeakScope();
  // Bytes above the level at construction.
  std::size_t peak_delta() const;

 private:
  std::size_t baseline_;
};

}  // namespace fused3s
