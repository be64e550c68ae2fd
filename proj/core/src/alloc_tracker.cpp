#include "fused3s/alloc_tracker.hpp"

namespace fused3s {

ScratchTracker& ScratchTracker::instance() {
  static ScratchTracker tracker;
  return tracker;
}

void ScratchTracker::on_allocate(std::size_t bytes) {
  const std::size_t now = current_.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  std::size_t peak = peak_.load(std::memory_order_relaxed);
  while (now > peak && !peak_.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
  }
}

void ScratchTracker::on_deallocate(std::size_t bytes) {
  current_.fetch_sub(bytes, std::memory_order_relaxed);
}

void ScratchTracker::reset_peak() { peak_.store(current_bytes(), std::memory_order_relaxed); }

PeakScope::PeakScope() : baseline_(ScratchTracker::instance().current_bytes()) {
  ScratchTracker::instance().reset_peak();
}

std::size_t PeakScope::peak_delta() const {
  const std::size_t peak = ScratchTracker::instance().peak_bytes();
  return peak > baseline_ ? peak - baseline_ : 0;
}

}  // namespace fused3s
