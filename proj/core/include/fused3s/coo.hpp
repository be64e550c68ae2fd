#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace fused3s {

// Binary-valued sparse matrix in coordinate form. Only the support is stored.
struct CooMatrix {
  std::uint32_t n_rows = 0;
  std::uint32_t n_cols = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;

  std::size_t nnz() const { return entries.size(); }

  // Sorts entries row-major and merges duplicates. Throws ValidationError on
  // an out-of-range index.
  void canonicalize();

  // Returns a canonicalized copy.
  CooMatrix canonical() const;

  friend bool operator==(const CooMatrix&, const CooMatrix&) = default;
};

CooMatrix identity_coo(std::uint32_t n);

}  // namespace fused3s
