#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fused3s/bsb.hpp"
#include "fused3s/dense_matrix.hpp"
#include "fused3s/tile_arith.hpp"

namespace fused3s {

enum class RwSchedule { original, reordered };

std::string_view to_string(RwSchedule s);

struct FusedConfig {
  TileShape tile = kDefaultTile;
  int warps_per_block = 4;
  WarpPartition warp_partition = WarpPartition::split_column;
  bool apply_remap = false;
  RwSchedule rw_schedule = RwSchedule::original;
  // Row windows are handed out to this many worker threads.
  int num_threads = 1;
  // Explicit processing order; overrides rw_schedule when non-empty.
  std::vector<std::uint32_t> processing_order;
};

// Throws ValidationError for W < 1, num_threads < 1 or an unsupported tile.
void validate(const FusedConfig& cfg);

// Running softmax statistics and output accumulator of one row window.
struct FusedState {
  std::size_t rows = 0;
  std::size_t d = 0;
  std::vector<float> m_o;    // running row max, -inf until a row sees a score
  std::vector<float> l_o;    // running normalizer
  std::vector<float> o_acc;  // rows x d, unnormalized output

  static FusedState initial(std::size_t rows, std::size_t d);
};

// Folds one r x cols score block (masked slots hold -inf) into `state`:
// updates the running max, rescales l_o and o_acc by exp(m_old - m_new), adds
// the block's row sums, and writes exp(s - m_new) to `e_block` (exactly 0 at
// masked slots). A row that is still empty keeps a scale factor of 1.
void online_softmax_step(FusedState& state, std::span<const float> s_block, std::size_t cols,
                         std::span<float> e_block);

// Column gather schedule for one row window: sptd_i cut into T_c = ceil(t / W)
// blocks of W * c slots. Slots past the compacted width hold kPadding.
struct GatherPlan {
  static constexpr std::uint32_t kPadding = std::numeric_limits<std::uint32_t>::max();

  std::uint32_t rw = 0;
  std::uint32_t tcbs = 0;
  std::uint32_t block_width = 0;  // W * c
  std::uint32_t num_blocks = 0;   // T_c
  std::vector<std::uint32_t> columns;

  std::span<const std::uint32_t> block(std::uint32_t j) const {
    return std::span<const std::uint32_t>(columns).subspan(
        static_cast<std::size_t>(j) * block_width, block_width);
  }
};

GatherPlan plan_gather(const BsbMatrix& a, std::uint32_t rw, int warps_per_block);

// Feature-dimension permutation in gather form: physical column j of the
// permuted operand holds logical column gather[j].
struct LayoutPermutation {
  std::vector<std::uint32_t> gather;
  std::vector<std::uint32_t> physical_of;  // inverse: logical f lives at physical_of[f]

  static LayoutPermutation identity(std::size_t d);
  // Throws ValidationError unless `gather` is a permutation of 0..d-1.
  static LayoutPermutation from_gather(std::vector<std::uint32_t> gather);
};

// Layout that places the k-indices one mma lane reads from a 16-wide fragment
// ({2t, 2t+1, 2t+8, 2t+9}) next to each other. Columns past the last full
// group of 16 keep their position.
LayoutPermutation fragment_contiguous_permutation(std::size_t d);

struct PermutedOperands {
  DenseMatrix q;
  DenseMatrix k;
  DenseMatrix v;
  LayoutPermutation layout;  // restores O's columns on write-back
};

PermutedOperands apply_layout_permutation(const DenseMatrix& q, const DenseMatrix& k,
                                          const DenseMatrix& v, const LayoutPermutation& layout);

// O = softmax(QK^T masked by A) V with half inputs, single-precision scores,
// softmax and output, and half-precision E feeding the second product. Rows
// of A without nonzeros produce zero rows. The result is bitwise independent
// of schedule, warp partition, remap and thread count.
DenseMatrix fused3s_forward(const BsbMatrix& a, const DenseMatrix& q, const DenseMatrix& k,
                            const DenseMatrix& v, const FusedConfig& cfg = {});

// Same computation on operands whose feature columns are already permuted.
// Output columns are returned in logical order.
DenseMatrix fused3s_forward(const BsbMatrix& a, const PermutedOperands& operands,
                            const FusedConfig& cfg = {});

// Upper bound on the tracked S/E scratch fused3s_forward holds at once:
// one r x W*c block of scores, exponentials and their half copy per worker.
std::size_t fused_scratch_bound(const BsbMatrix& a, const FusedConfig& cfg);

struct RwOccupancy {
  std::uint32_t rw = 0;
  int active_warps_sddmm = 0;
  int active_warps_spmm = 0;
  std::string bound;  // "TCB count", "feature dimension" or "warps per block"
  std::vector<int> per_iteration;
};

std::vector<RwOccupancy> occupancy_estimate(const BsbMatrix& a, const FusedConfig& cfg,
                                            std::size_t d);

}  // namespace fused3s
