#include "fused3s/fused_attention.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "fused3s/alloc_tracker.hpp"
#include "fused3s/error.hpp"
#include "fused3s/ordering.hpp"

namespace fused3s {

namespace {

constexpr float kNegInf = -std::numeric_limits<float>::infinity();

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

std::vector<std::uint32_t> processing_order(const BsbMatrix& a, const FusedConfig& cfg) {
  if (!cfg.processing_order.empty()) {
    if (cfg.processing_order.size() != a.num_rw() ||
        !is_permutation_of_iota(cfg.processing_order)) {
      throw ValidationError("processing_order is not a permutation of the row windows");
    }
    return cfg.processing_order;
  }
  if (cfg.rw_schedule == RwSchedule::reordered) {
    const auto counts = a.tcb_counts();
    return stable_descending_order(std::span<const std::uint32_t>(counts));
  }
  std::vector<std::uint32_t> order(a.num_rw());
  std::iota(order.begin(), order.end(), 0u);
  return order;
}

// Per-worker buffers. S and E go through the scratch tracker; their size is
// fixed by r, W and c and never by N.
struct Workspace {
  std::vector<Half> q_block;
  std::vector<Half> k_gathered;  // d x W*c, transposed gather of K
  std::vector<Half> v_gathered;  // W*c x d
  tracked_vector<float> scores;
  tracked_vector<float> exps;
  tracked_vector<Half> exps_half;

  Workspace(std::size_t r, std::size_t d, std::size_t width)
      : q_block(r * d),
        k_gathered(d * width),
        v_gathered(width * d),
        scores(r * width),
        exps(r * width),
        exps_half(r * width) {}
};

class Engine {
 public:
  Engine(const BsbMatrix& a, const PermutedOperands& ops, const FusedConfig& cfg)
      : a_(a),
        layout_(ops.layout),
        cfg_(cfg),
        n_(a.n_rows()),
        d_(ops.q.cols()),
        width_(static_cast<std::size_t>(cfg.warps_per_block) * a.c()),
        q_(ops.q.to_half_vector()),
        k_(ops.k.to_half_vector()),
        v_(ops.v.to_half_vector()),
        out_(n_ * d_, 0.0f) {}

  std::vector<float> run(const std::vector<std::uint32_t>& order) {
    const auto threads = static_cast<std::size_t>(
        std::min<std::size_t>(static_cast<std::size_t>(cfg_.num_threads),
                              std::max<std::size_t>(order.size(), 1)));
    if (threads <= 1) {
      Workspace ws(a_.r(), d_, width_);
      for (std::uint32_t rw : order) process(rw, ws);
      return std::move(out_);
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> workers;
      workers.reserve(threads);
      for (std::size_t t = 0; t < threads; ++t) {
        workers.emplace_back([&] {
          try {
            Workspace ws(a_.r(), d_, width_);
            for (std::size_t i = next++; i < order.size(); i = next++) process(order[i], ws);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
    return std::move(out_);
  }

 private:
  void process(std::uint32_t rw, Workspace& ws) {
    const std::size_t r = a_.r();
    const std::size_t c = a_.c();
    const std::size_t row0 = static_cast<std::size_t>(rw) * r;
    const WorkSplit split{cfg_.warp_partition, cfg_.warps_per_block};
    const auto& phys = layout_.physical_of;

    // Q_i in logical feature order; rows past N stay zero.
    for (std::size_t p = 0; p < r; ++p) {
      for (std::size_t f = 0; f < d_; ++f) {
        ws.q_block[p * d_ + f] = row0 + p < n_ ? q_[(row0 + p) * d_ + phys[f]] : Half{};
      }
    }

    const GatherPlan plan = plan_gather(a_, rw, cfg_.warps_per_block);
    const std::uint32_t first_tcb = a_.tro()[rw];
    FusedState state = FusedState::initial(r, d_);

    for (std::uint32_t j = 0; j < plan.num_blocks; ++j) {
      const auto cols = plan.block(j);
      for (std::size_t s = 0; s < width_; ++s) {
        const bool pad = cols[s] == GatherPlan::kPadding;
        for (std::size_t f = 0; f < d_; ++f) {
          ws.k_gathered[f * width_ + s] = pad ? Half{} : k_[cols[s] * d_ + phys[f]];
          ws.v_gathered[s * d_ + f] = pad ? Half{} : v_[cols[s] * d_ + f];
        }
      }

      // SDDMM
      std::fill(ws.scores.begin(), ws.scores.end(), 0.0f);
      tbgemm(cfg_.tile, HalfRef{ws.q_block, r, d_}, HalfRef{ws.k_gathered, d_, width_},
             FloatRef{ws.scores, r, width_}, split);

      for (std::size_t s = 0; s < width_; ++s) {
        const std::size_t compact = j * width_ + s;
        const std::size_t local_tcb = compact / c;
        for (std::size_t p = 0; p < r; ++p) {
          const bool keep = local_tcb < plan.tcbs &&
                            a_.bit(first_tcb + static_cast<std::uint32_t>(local_tcb),
                                   static_cast<std::uint32_t>(p),
                                   static_cast<std::uint32_t>(compact % c));
          if (!keep) ws.scores[p * width_ + s] = kNegInf;
        }
      }

      online_softmax_step(state, ws.scores, width_, ws.exps);
      for (std::size_t i = 0; i < ws.exps.size(); ++i) ws.exps_half[i] = Half::from_float(ws.exps[i]);

      // SpMM into the rescaled accumulator.
      tbgemm(cfg_.tile, HalfRef{ws.exps_half, r, width_}, HalfRef{ws.v_gathered, width_, d_},
             FloatRef{state.o_acc, r, d_}, split);
    }

    for (std::size_t p = 0; p < r && row0 + p < n_; ++p) {
      const float l = state.l_o[p];
      for (std::size_t f = 0; f < d_; ++f) {
        out_[(row0 + p) * d_ + f] = l > 0.0f ? state.o_acc[p * d_ + phys[f]] / l : 0.0f;
      }
    }
  }

  const BsbMatrix& a_;
  const LayoutPermutation& layout_;
  const FusedConfig& cfg_;
  std::size_t n_;
  std::size_t d_;
  std::size_t width_;
  std::vector<Half> q_;
  std::vector<Half> k_;
  std::vector<Half> v_;
  std::vector<float> out_;
};

void check_operands(const BsbMatrix& a, const DenseMatrix& q, const DenseMatrix& k,
                    const DenseMatrix& v) {
  if (a.n_rows() != a.n_cols()) {
    throw ShapeError("fused3s_forward: sparse matrix is " + std::to_string(a.n_rows()) + "x" +
                     std::to_string(a.n_cols()) + ", expected square");
  }
  const std::size_t n = a.n_rows();
  for (const DenseMatrix* m : {&q, &k, &v}) {
    if (m->rows() != n || m->cols() != q.cols()) {
      throw ShapeError("fused3s_forward: operands must all be " + std::to_string(n) + "x" +
                       std::to_string(q.cols()));
    }
    if (m->precision() != Precision::half) {
      throw ValidationError("fused3s_forward: Q, K and V must be half precision");
    }
  }
  if (q.cols() == 0) throw ShapeError("fused3s_forward: feature dimension must be >= 1");
}

}  // namespace

std::string_view to_string(RwSchedule s) {
  return s == RwSchedule::original ? "original" : "reordered";
}

void validate(const FusedConfig& cfg) {
  if (cfg.warps_per_block < 1) throw ValidationError("warps_per_block must be >= 1");
  if (cfg.num_threads < 1) throw ValidationError("num_threads must be >= 1");
  if (!is_supported(cfg.tile)) throw ValidationError("unsupported tile shape");
}

FusedState FusedState::initial(std::size_t rows, std::size_t d) {
  FusedState s;
  s.rows = rows;
  s.d = d;
  s.m_o.assign(rows, kNegInf);
  s.l_o.assign(rows, 0.0f);
  s.o_acc.assign(rows * d, 0.0f);
  return s;
}

void online_softmax_step(FusedState& state, std::span<const float> s_block, std::size_t cols,
                         std::span<float> e_block) {
  if (s_block.size() != state.rows * cols || e_block.size() != s_block.size()) {
    throw ShapeError("online_softmax_step: block size does not match state rows");
  }
  for (std::size_t p = 0; p < state.rows; ++p) {
    const auto row = s_block.subspan(p * cols, cols);
    const float m_old = state.m_o[p];
    const float m_new = std::max(m_old, *std::max_element(row.begin(), row.end()));
    // exp(-inf - (-inf)) would be NaN; an empty row needs no rescaling.
    const float scale = m_new == kNegInf ? 1.0f : std::exp(m_old - m_new);

    float row_sum = 0.0f;
    for (std::size_t s = 0; s < cols; ++s) {
      const float e = row[s] == kNegInf ? 0.0f : std::exp(row[s] - m_new);
      e_block[p * cols + s] = e;
      row_sum += e;
    }
    state.l_o[p] = scale * state.l_o[p] + row_sum;
    for (std::size_t f = 0; f < state.d; ++f) state.o_acc[p * state.d + f] *= scale;
    state.m_o[p] = m_new;
  }
}

GatherPlan plan_gather(const BsbMatrix& a, std::uint32_t rw, int warps_per_block) {
  if (rw >= a.num_rw()) throw ValidationError("plan_gather: row window out of range");
  if (warps_per_block < 1) throw ValidationError("plan_gather: warps_per_block must be >= 1");
  GatherPlan plan;
  plan.rw = rw;
  plan.tcbs = a.tcb_count(rw);
  plan.block_width = static_cast<std::uint32_t>(warps_per_block) * a.c();
  plan.num_blocks = static_cast<std::uint32_t>(ceil_div(plan.tcbs, warps_per_block));
  const auto cols = a.columns(rw);
  plan.columns.assign(static_cast<std::size_t>(plan.num_blocks) * plan.block_width,
                      GatherPlan::kPadding);
  std::copy(cols.begin(), cols.end(), plan.columns.begin());
  return plan;
}

LayoutPermutation LayoutPermutation::identity(std::size_t d) {
  std::vector<std::uint32_t> gather(d);
  std::iota(gather.begin(), gather.end(), 0u);
  return from_gather(std::move(gather));
}

LayoutPermutation LayoutPermutation::from_gather(std::vector<std::uint32_t> gather) {
  if (!is_permutation_of_iota(gather)) {
    throw ValidationError("layout permutation is not a permutation of the feature dimension");
  }
  LayoutPermutation p;
  p.physical_of.resize(gather.size());
  for (std::uint32_t j = 0; j < gather.size(); ++j) p.physical_of[gather[j]] = j;
  p.gather = std::move(gather);
  return p;
}

LayoutPermutation fragment_contiguous_permutation(std::size_t d) {
  std::vector<std::uint32_t> gather(d);
  std::iota(gather.begin(), gather.end(), 0u);
  for (std::size_t base = 0; base + 16 <= d; base += 16) {
    for (std::uint32_t lane = 0; lane < 4; ++lane) {
      const std::uint32_t logical[4] = {2 * lane, 2 * lane + 1, 2 * lane + 8, 2 * lane + 9};
      for (std::uint32_t e = 0; e < 4; ++e) {
        gather[base + 4 * lane + e] = static_cast<std::uint32_t>(base) + logical[e];
      }
    }
  }
  return LayoutPermutation::from_gather(std::move(gather));
}

PermutedOperands apply_layout_permutation(const DenseMatrix& q, const DenseMatrix& k,
                                          const DenseMatrix& v, const LayoutPermutation& layout) {
  if (layout.gather.size() != q.cols() || k.cols() != q.cols() || v.cols() != q.cols()) {
    throw ShapeError("apply_layout_permutation: permutation length differs from feature dimension");
  }
  // Re-validate: the struct may have been filled by hand.
  const LayoutPermutation checked = LayoutPermutation::from_gather(layout.gather);
  auto permute = [&](const DenseMatrix& m) {
    DenseMatrix out(m.rows(), m.cols(), m.precision());
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t j = 0; j < m.cols(); ++j) out.set(r, j, m(r, checked.gather[j]));
    }
    return out;
  };
  return PermutedOperands{permute(q), permute(k), permute(v), checked};
}

DenseMatrix fused3s_forward(const BsbMatrix& a, const DenseMatrix& q, const DenseMatrix& k,
                            const DenseMatrix& v, const FusedConfig& cfg) {
  check_operands(a, q, k, v);
  const LayoutPermutation layout = cfg.apply_remap ? fragment_contiguous_permutation(q.cols())
                                                   : LayoutPermutation::identity(q.cols());
  return fused3s_forward(a, apply_layout_permutation(q, k, v, layout), cfg);
}

DenseMatrix fused3s_forward(const BsbMatrix& a, const PermutedOperands& ops,
                            const FusedConfig& cfg) {
  validate(cfg);
  check_operands(a, ops.q, ops.k, ops.v);
  if (ops.layout.gather.size() != ops.q.cols() || ops.layout.physical_of.size() != ops.q.cols()) {
    throw ShapeError("fused3s_forward: layout permutation length differs from feature dimension");
  }
  Engine engine(a, ops, cfg);
  std::vector<float> out = engine.run(processing_order(a, cfg));
  return DenseMatrix::from_values(a.n_rows(), ops.q.cols(), {out.begin(), out.end()},
                                  Precision::single);
}

std::size_t fused_scratch_bound(const BsbMatrix& a, const FusedConfig& cfg) {
  validate(cfg);
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.num_threads),
                                                    std::max<std::size_t>(a.num_rw(), 1));
  const std::size_t block = static_cast<std::size_t>(a.r()) * cfg.warps_per_block * a.c();
  return workers * block * (2 * sizeof(float) + sizeof(Half));
}

std::vector<RwOccupancy> occupancy_estimate(const BsbMatrix& a, const FusedConfig& cfg,
                                            std::size_t d) {
  validate(cfg);
  const int w = cfg.warps_per_block;
  const int feature_tiles = static_cast<int>(ceil_div(d, static_cast<std::size_t>(cfg.tile.n)));
  std::vector<RwOccupancy> report;
  report.reserve(a.num_rw());
  for (std::uint32_t rw = 0; rw < a.num_rw(); ++rw) {
    RwOccupancy occ;
    occ.rw = rw;
    const int t = static_cast<int>(a.tcb_count(rw));
    const int iterations = (t + w - 1) / w;
    for (int j = 0; j < iterations; ++j) {
      occ.per_iteration.push_back(cfg.warp_partition == WarpPartition::split_column
                                      ? std::min(w, t - j * w)
                                      : std::min(w, feature_tiles));
    }
    if (cfg.warp_partition == WarpPartition::split_column) {
      occ.active_warps_sddmm = std::min(w, t);
      occ.bound = t < w ? "TCB count" : "warps per block";
    } else {
      occ.active_warps_sddmm = std::min(w, feature_tiles);
      occ.bound = feature_tiles < w ? "feature dimension" : "warps per block";
    }
    occ.active_warps_spmm = occ.active_warps_sddmm;
    report.push_back(std::move(occ));
  }
  return report;
}

}  // namespace fused3s
