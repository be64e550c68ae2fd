#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace fused3s {

// Indices sorted by key descending, equal keys by index ascending.
template <class T>
std::vector<std::uint32_t> stable_descending_order(std::span<const T> keys) {
  std::vector<std::uint32_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return keys[a] > keys[b]; });
  return order;
}

inline bool is_permutation_of_iota(std::span<const std::uint32_t> order) {
  std::vector<bool> seen(order.size(), false);
  for (std::uint32_t v : order) {
    if (v >= order.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

}  // namespace fused3s
