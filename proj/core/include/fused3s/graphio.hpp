#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "fused3s/coo.hpp"

namespace fused3s {

// Coordinate-format Matrix Market. Values are dropped, indices shifted to
// 0-based, symmetric/skew/hermitian files expanded to both triangles and
// duplicates merged. Throws ParseError (with line number) or IoError.
CooMatrix load_matrix_market(const std::filesystem::path& path);
CooMatrix parse_matrix_market(std::string_view text);

struct EdgeListOptions {
  bool symmetrize = false;
  bool add_self_loops = false;
  // Matrix order; inferred as max index + 1 when unset.
  std::optional<std::uint32_t> n;
};

// Whitespace-separated integer pairs; lines starting with '#' or '%' are
// comments.
CooMatrix load_edge_list(const std::filesystem::path& path, const EdgeListOptions& opts = {});
CooMatrix parse_edge_list(std::string_view text, const EdgeListOptions& opts = {});

enum class SyntheticKind { uniform, power_law, batched_blocks };

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::uniform;
  std::uint64_t seed = 1;
  std::uint32_t n = 64;          // uniform, power_law
  double density = 0.05;         // uniform: per-entry probability
  std::uint32_t attach = 4;      // power_law: edges added per new node
  std::uint32_t components = 4;  // batched_blocks
  std::uint32_t min_size = 16;   // batched_blocks: component order range
  std::uint32_t max_size = 16;
  double intra_density = 1.0;    // batched_blocks: per-entry probability within a block
};

// "kind:key=value,..." e.g. "power_law:n=1000,m=4,seed=3". Keys: n, density,
// m, components, size (sets min and max), min_size, max_size, intra, seed.
SyntheticSpec parse_synthetic_spec(std::string_view text);

// Deterministic for a fixed spec. uniform is a directed Bernoulli pattern,
// power_law a symmetric preferential-attachment graph with nodes numbered in
// arrival order, batched_blocks a block-diagonal union of dense components.
// Throws ValidationError for inconsistent parameters.
CooMatrix generate_synthetic(const SyntheticSpec& spec);

struct DecileRange {
  std::uint32_t size = 0;
  std::uint32_t min = 0;
  std::uint32_t max = 0;
};

struct SparsityStats {
  std::uint32_t r = 0;
  std::uint32_t c = 0;
  std::uint64_t num_rw = 0;  // row windows included in the statistics
  std::uint64_t total_tcbs = 0;
  std::uint64_t nnz = 0;
  double tcb_per_rw_avg = 0.0;
  double tcb_per_rw_cv = 0.0;
  double nnz_per_tcb_avg = 0.0;
  double nnz_per_tcb_cv = 0.0;
  std::array<DecileRange, 10> deciles{};
};

struct StatsOptions {
  // Row windows without any TCB count as 0 when true, are skipped otherwise.
  bool include_empty_rws = true;
};

// CV is the population standard deviation over the mean (0 when the mean is
// 0). Deciles split the ascending TCB counts into ten groups whose sizes
// differ by at most one, larger groups first.
SparsityStats compute_stats(const CooMatrix& a, std::uint32_t r, std::uint32_t c,
                            const StatsOptions& opts = {});

std::string stats_to_json(const SparsityStats& s, std::string_view name = "");
// Aligned text: one summary row (windows, edges, TCB/RW and nnz/TCB with their CVs)
// followed by the decile table.
std::string stats_to_table(const SparsityStats& s, std::string_view name = "");

}  // namespace fused3s
