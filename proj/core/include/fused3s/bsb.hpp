#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "fused3s/coo.hpp"

namespace fused3s {

// Binary Sparse Block matrix.
//
// Rows are grouped into row windows (RWs) of height r. Inside each RW the
// all-zero columns are dropped; the surviving original column indices are
// kept, ascending, in sptd. The compacted RW is cut into r x c tensor-core
// blocks (TCBs), each described by an r*c-bit bitmap: bit p*c + q (LSB first
// within each byte) is set iff row i*r + p has a nonzero in original column
// sptd_i[j*c + q], where j is the TCB's position in the RW.
//
// Instances are immutable; every constructor path validates all invariants.
class BsbMatrix {
 public:
  struct Parts {
    std::uint32_t n_rows = 0;
    std::uint32_t n_cols = 0;
    std::uint32_t r = 0;
    std::uint32_t c = 0;
    std::vector<std::uint32_t> tro;
    std::vector<std::uint32_t> sptd_offsets;
    std::vector<std::uint32_t> sptd;
    std::vector<std::uint8_t> bitmaps;
    std::vector<std::uint32_t> rw_order;
  };

  BsbMatrix() = default;

  // Validates `parts` and throws FormatError naming the first bad field.
  static BsbMatrix from_parts(Parts parts);

  std::uint32_t n_rows() const { return p_.n_rows; }
  std::uint32_t n_cols() const { return p_.n_cols; }
  std::uint32_t r() const { return p_.r; }
  std::uint32_t c() const { return p_.c; }
  std::uint32_t num_rw() const { return static_cast<std::uint32_t>(p_.tro.size()) - 1; }
  std::uint32_t total_tcbs() const { return p_.tro.back(); }
  std::size_t bytes_per_tcb() const { return (static_cast<std::size_t>(p_.r) * p_.c + 7) / 8; }

  std::span<const std::uint32_t> tro() const { return p_.tro; }
  std::span<const std::uint32_t> sptd_offsets() const { return p_.sptd_offsets; }
  std::span<const std::uint32_t> sptd() const { return p_.sptd; }
  std::span<const std::uint8_t> bitmaps() const { return p_.bitmaps; }
  std::span<const std::uint32_t> rw_order() const { return p_.rw_order; }

  // TCB count t of row window rw.
  std::uint32_t tcb_count(std::uint32_t rw) const { return p_.tro[rw + 1] - p_.tro[rw]; }
  std::vector<std::uint32_t> tcb_counts() const;

  // Original column indices kept by row window rw.
  std::span<const std::uint32_t> columns(std::uint32_t rw) const {
    return sptd().subspan(p_.sptd_offsets[rw], p_.sptd_offsets[rw + 1] - p_.sptd_offsets[rw]);
  }

  // Bitmap of the tcb-th block in global (row-window-major) numbering.
  std::span<const std::uint8_t> bitmap(std::uint32_t tcb) const {
    return bitmaps().subspan(tcb * bytes_per_tcb(), bytes_per_tcb());
  }
  bool bit(std::uint32_t tcb, std::uint32_t p, std::uint32_t q) const {
    const std::size_t index = static_cast<std::size_t>(p) * p_.c + q;
    return (bitmap(tcb)[index / 8] >> (index % 8)) & 1u;
  }

  std::uint64_t nnz() const;

  // Same matrix with a different scheduling order; throws FormatError if
  // `order` is not a permutation of the row windows.
  BsbMatrix with_rw_order(std::vector<std::uint32_t> order) const;

  const Parts& parts() const { return p_; }

  friend bool operator==(const BsbMatrix& a, const BsbMatrix& b);

 private:
  Parts p_{0, 0, 1, 1, {0}, {0}, {}, {}, {}};
};

// Throws ValidationError for r or c of zero or out-of-range entries.
// Duplicate entries are merged.
BsbMatrix build_bsb(const CooMatrix& a, std::uint32_t r, std::uint32_t c);

// Inverse of build_bsb: canonical (row-major sorted) support.
CooMatrix to_coo(const BsbMatrix& b);

// Stable sort of row windows by descending TCB count.
BsbMatrix reorder_row_windows(const BsbMatrix& b);

// Little-endian "BSB1" stream, see README for the layout.
std::vector<std::uint8_t> serialize(const BsbMatrix& b);
BsbMatrix deserialize(std::span<const std::uint8_t> bytes);

void write_bsb_file(const std::filesystem::path& path, const BsbMatrix& b);
BsbMatrix read_bsb_file(const std::filesystem::path& path);

// Storage cost of sparse formats, in bits.
enum class SparseFormat { CSR, SR_BCSR, ME_BCRS, BCSR, TCF, ME_TCF, BitTCF, BSB };

// N: rows, z: nonzeros, r: row-window height, b: number of blocks,
// bc: stored compacted column indices, rc: bits (or values) per block.
// For ME-TCF and BitTCF, whether z is counted before or after compaction is
// left to the caller; compaction never changes it for binary matrices built
// here, but externally supplied counts may differ.
struct FootprintParams {
  std::uint64_t N = 0;
  std::uint64_t z = 0;
  std::uint64_t r = 1;
  std::uint64_t b = 0;
  std::uint64_t bc = 0;
  std::uint64_t rc = 0;
};

std::uint64_t footprint_bits(SparseFormat format, const FootprintParams& params);
FootprintParams footprint_params(const BsbMatrix& b);

// Accepts the names printed by to_string (case-sensitive, e.g. "ME_TCF").
// Throws ValidationError on an unknown name.
SparseFormat parse_sparse_format(std::string_view name);
std::string_view to_string(SparseFormat f);
std::span<const SparseFormat> all_sparse_formats();

}  // namespace fused3s
