#include "fused3s/coo.hpp"

#include <algorithm>
#include <string>

#include "fused3s/error.hpp"

namespace fused3s {

void CooMatrix::canonicalize() {
  for (const auto& [r, c] : entries) {
    if (r >= n_rows || c >= n_cols) {
      throw ValidationError("entry (" + std::to_string(r) + ", " + std::to_string(c) +
                            ") outside " + std::to_string(n_rows) + "x" + std::to_string(n_cols));
    }
  }
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
}

CooMatrix CooMatrix::canonical() const {
  CooMatrix copy = *this;
  copy.canonicalize();
  return copy;
}

CooMatrix identity_coo(std::uint32_t n) {
  CooMatrix m{n, n, {}};
  m.entries.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) m.entries.emplace_back(i, i);
  return m;
}

}  // namespace fused3s
