#include "fused3s/bsb.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>

#include "fused3s/error.hpp"
#include "fused3s/ordering.hpp"

namespace fused3s {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw FormatError(field, what);
}

void validate(const BsbMatrix::Parts& p) {
  require(p.r >= 1 && p.c >= 1, "header", "r and c must be positive");
  require(!p.tro.empty(), "tro", "missing");
  const std::size_t num_rw = p.tro.size() - 1;
  require(num_rw == ceil_div(p.n_rows, p.r), "tro",
          "length " + std::to_string(p.tro.size()) + " does not match ceil(n_rows / r) + 1");
  require(p.tro[0] == 0, "tro", "first offset must be 0");
  for (std::size_t i = 0; i < num_rw; ++i) {
    require(p.tro[i] <= p.tro[i + 1], "tro", "decreasing at row window " + std::to_string(i));
  }

  require(p.sptd_offsets.size() == p.tro.size(), "sptd_offsets", "length differs from tro");
  require(p.sptd_offsets[0] == 0, "sptd_offsets", "first offset must be 0");
  for (std::size_t i = 0; i < num_rw; ++i) {
    require(p.sptd_offsets[i] <= p.sptd_offsets[i + 1], "sptd_offsets",
            "decreasing at row window " + std::to_string(i));
  }
  require(p.sptd_offsets.back() == p.sptd.size(), "sptd_offsets",
          "last offset does not match sptd length");

  const std::size_t bytes_per_tcb = (static_cast<std::size_t>(p.r) * p.c + 7) / 8;
  require(p.bitmaps.size() == static_cast<std::size_t>(p.tro.back()) * bytes_per_tcb, "bitmaps",
          "size does not match total TCB count");

  std::vector<std::uint8_t> column_seen;
  for (std::size_t i = 0; i < num_rw; ++i) {
    const std::uint32_t begin = p.sptd_offsets[i];
    const std::uint32_t width = p.sptd_offsets[i + 1] - begin;
    const std::uint32_t tcbs = p.tro[i + 1] - p.tro[i];
    require(tcbs == ceil_div(width, p.c), "tro",
            "row window " + std::to_string(i) + " has " + std::to_string(tcbs) +
                " TCBs for compacted width " + std::to_string(width));
    for (std::uint32_t j = 0; j < width; ++j) {
      require(p.sptd[begin + j] < p.n_cols, "sptd", "column index out of range");
      require(j == 0 || p.sptd[begin + j - 1] < p.sptd[begin + j], "sptd",
              "not strictly increasing in row window " + std::to_string(i));
    }

    const std::uint32_t rows_here =
        std::min<std::uint32_t>(p.r, p.n_rows - static_cast<std::uint32_t>(i) * p.r);
    column_seen.assign(width, 0);
    for (std::uint32_t t = 0; t < tcbs; ++t) {
      const std::uint8_t* bits = p.bitmaps.data() + (p.tro[i] + t) * bytes_per_tcb;
      for (std::size_t index = 0; index < bytes_per_tcb * 8; ++index) {
        if (!((bits[index / 8] >> (index % 8)) & 1u)) continue;
        const std::size_t row = index / p.c;
        const std::size_t col = t * p.c + index % p.c;
        require(index < static_cast<std::size_t>(p.r) * p.c && row < rows_here && col < width,
                "bitmaps", "bit set outside the valid region of TCB " + std::to_string(p.tro[i] + t));
        column_seen[col] = 1;
      }
    }
    require(std::find(column_seen.begin(), column_seen.end(), 0) == column_seen.end(), "bitmaps",
            "row window " + std::to_string(i) + " keeps an all-zero column");
  }

  require(p.rw_order.size() == num_rw && is_permutation_of_iota(p.rw_order), "rw_order",
          "not a permutation of the row windows");
}

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void u32s(std::span<const std::uint32_t> vs) {
    for (auto v : vs) u32(v);
  }
  void bytes(std::span<const std::uint8_t> bs) { out_.insert(out_.end(), bs.begin(), bs.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int s = 0; s < 4; ++s) v |= static_cast<std::uint32_t>(in_[pos_ + s]) << (8 * s);
    pos_ += 4;
    return v;
  }
  std::vector<std::uint32_t> u32s(std::uint64_t count, const char* field) {
    need(count * 4, field);
    std::vector<std::uint32_t> out(count);
    for (auto& v : out) v = u32(field);
    return out;
  }
  std::vector<std::uint8_t> bytes(std::uint64_t count, const char* field) {
    need(count, field);
    std::vector<std::uint8_t> out(in_.begin() + pos_, in_.begin() + pos_ + count);
    pos_ += count;
    return out;
  }
  bool at_end() const { return pos_ == in_.size(); }

 private:
  void need(std::uint64_t count, const char* field) const {
    if (count > in_.size() - pos_) throw FormatError(field, "truncated stream");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

constexpr std::array<std::uint8_t, 4> kMagic{'B', 'S', 'B', '1'};

constexpr std::array<SparseFormat, 8> kFormats{
    SparseFormat::CSR, SparseFormat::SR_BCSR, SparseFormat::ME_BCRS, SparseFormat::BCSR,
    SparseFormat::TCF, SparseFormat::ME_TCF,  SparseFormat::BitTCF,  SparseFormat::BSB};

}  // namespace

BsbMatrix BsbMatrix::from_parts(Parts parts) {
  validate(parts);
  BsbMatrix b;
  b.p_ = std::move(parts);
  return b;
}

std::vector<std::uint32_t> BsbMatrix::tcb_counts() const {
  std::vector<std::uint32_t> counts(num_rw());
  for (std::uint32_t i = 0; i < num_rw(); ++i) counts[i] = tcb_count(i);
  return counts;
}

std::uint64_t BsbMatrix::nnz() const {
  std::uint64_t total = 0;
  for (std::uint8_t byte : p_.bitmaps) total += static_cast<std::uint64_t>(std::popcount(byte));
  return total;
}

BsbMatrix BsbMatrix::with_rw_order(std::vector<std::uint32_t> order) const {
  Parts parts = p_;
  parts.rw_order = std::move(order);
  require(parts.rw_order.size() == num_rw() && is_permutation_of_iota(parts.rw_order), "rw_order",
          "not a permutation of the row windows");
  BsbMatrix b;
  b.p_ = std::move(parts);
  return b;
}

bool operator==(const BsbMatrix& a, const BsbMatrix& b) {
  const auto& x = a.p_;
  const auto& y = b.p_;
  return x.n_rows == y.n_rows && x.n_cols == y.n_cols && x.r == y.r && x.c == y.c &&
         x.tro == y.tro && x.sptd_offsets == y.sptd_offsets && x.sptd == y.sptd &&
         x.bitmaps == y.bitmaps && x.rw_order == y.rw_order;
}

BsbMatrix build_bsb(const CooMatrix& a, std::uint32_t r, std::uint32_t c) {
  if (r == 0 || c == 0) throw ValidationError("build_bsb: r and c must be positive");
  const CooMatrix coo = a.canonical();

  BsbMatrix::Parts p;
  p.n_rows = coo.n_rows;
  p.n_cols = coo.n_cols;
  p.r = r;
  p.c = c;
  const auto num_rw = static_cast<std::uint32_t>(ceil_div(coo.n_rows, r));
  const std::size_t bytes_per_tcb = (static_cast<std::size_t>(r) * c + 7) / 8;
  p.tro.assign(1, 0);
  p.sptd_offsets.assign(1, 0);
  p.rw_order.resize(num_rw);
  std::iota(p.rw_order.begin(), p.rw_order.end(), 0u);

  auto it = coo.entries.begin();
  for (std::uint32_t rw = 0; rw < num_rw; ++rw) {
    const std::uint64_t row_end = static_cast<std::uint64_t>(rw + 1) * r;
    const auto window_begin = it;
    while (it != coo.entries.end() && it->first < row_end) ++it;
    const auto window_end = it;

    std::vector<std::uint32_t> cols;
    cols.reserve(static_cast<std::size_t>(std::distance(window_begin, window_end)));
    for (auto e = window_begin; e != window_end; ++e) cols.push_back(e->second);
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());

    const auto tcbs = static_cast<std::uint32_t>(ceil_div(cols.size(), c));
    const std::size_t bitmap_base = p.bitmaps.size();
    p.bitmaps.resize(bitmap_base + tcbs * bytes_per_tcb, 0);
    for (auto e = window_begin; e != window_end; ++e) {
      const auto compact = static_cast<std::size_t>(
          std::lower_bound(cols.begin(), cols.end(), e->second) - cols.begin());
      const std::size_t tcb = compact / c;
      const std::size_t index = static_cast<std::size_t>(e->first - rw * r) * c + compact % c;
      p.bitmaps[bitmap_base + tcb * bytes_per_tcb + index / 8] |=
          static_cast<std::uint8_t>(1u << (index % 8));
    }

    p.sptd.insert(p.sptd.end(), cols.begin(), cols.end());
    p.tro.push_back(p.tro.back() + tcbs);
    p.sptd_offsets.push_back(static_cast<std::uint32_t>(p.sptd.size()));
  }
  return BsbMatrix::from_parts(std::move(p));
}

CooMatrix to_coo(const BsbMatrix& b) {
  CooMatrix out{b.n_rows(), b.n_cols(), {}};
  out.entries.reserve(b.nnz());
  for (std::uint32_t rw = 0; rw < b.num_rw(); ++rw) {
    const auto cols = b.columns(rw);
    for (std::uint32_t p = 0; p < b.r(); ++p) {
      for (std::uint32_t t = 0; t < b.tcb_count(rw); ++t) {
        const std::uint32_t tcb = b.tro()[rw] + t;
        for (std::uint32_t q = 0; q < b.c(); ++q) {
          if (b.bit(tcb, p, q)) out.entries.emplace_back(rw * b.r() + p, cols[t * b.c() + q]);
        }
      }
    }
  }
  return out;
}

BsbMatrix reorder_row_windows(const BsbMatrix& b) {
  const auto counts = b.tcb_counts();
  return b.with_rw_order(stable_descending_order(std::span<const std::uint32_t>(counts)));
}

std::vector<std::uint8_t> serialize(const BsbMatrix& b) {
  Writer w;
  w.bytes(kMagic);
  w.u32(b.n_rows());
  w.u32(b.n_cols());
  w.u32(b.r());
  w.u32(b.c());
  w.u32(b.num_rw());
  w.u32(b.total_tcbs());
  w.u32(static_cast<std::uint32_t>(b.sptd().size()));
  w.u32s(b.tro());
  w.u32s(b.sptd_offsets());
  w.u32s(b.sptd());
  w.bytes(b.bitmaps());
  w.u32s(b.rw_order());
  return w.take();
}

BsbMatrix deserialize(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  const auto magic = in.bytes(4, "magic");
  require(std::equal(magic.begin(), magic.end(), kMagic.begin()), "magic", "expected \"BSB1\"");
  BsbMatrix::Parts p;
  p.n_rows = in.u32("n_rows");
  p.n_cols = in.u32("n_cols");
  p.r = in.u32("r");
  p.c = in.u32("c");
  require(p.r >= 1 && p.c >= 1, "header", "r and c must be positive");
  const std::uint32_t num_rw = in.u32("num_rw");
  const std::uint32_t total_tcbs = in.u32("total_tcbs");
  const std::uint32_t total_sptd = in.u32("total_sptd_len");
  require(num_rw == ceil_div(p.n_rows, p.r), "num_rw", "does not match ceil(n_rows / r)");
  p.tro = in.u32s(static_cast<std::uint64_t>(num_rw) + 1, "tro");
  p.sptd_offsets = in.u32s(static_cast<std::uint64_t>(num_rw) + 1, "sptd_offsets");
  p.sptd = in.u32s(total_sptd, "sptd");
  const std::uint64_t bytes_per_tcb = (static_cast<std::uint64_t>(p.r) * p.c + 7) / 8;
  p.bitmaps = in.bytes(bytes_per_tcb * total_tcbs, "bitmaps");
  p.rw_order = in.u32s(num_rw, "rw_order");
  require(in.at_end(), "trailer", "unexpected bytes after rw_order");
  require(p.tro.back() == total_tcbs, "total_tcbs", "does not match tro");
  return BsbMatrix::from_parts(std::move(p));
}

void write_bsb_file(const std::filesystem::path& path, const BsbMatrix& b) {
  const auto bytes = serialize(b);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

BsbMatrix read_bsb_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

std::uint64_t footprint_bits(SparseFormat format, const FootprintParams& p) {
  if (p.r == 0) throw ValidationError("footprint_bits: r must be positive");
  const std::uint64_t windows = ceil_div(p.N, p.r);
  const std::uint64_t block_cells = p.b * p.rc;
  switch (format) {
    case SparseFormat::CSR:
      return 32 * (p.N + 2 * p.z);
    case SparseFormat::SR_BCSR:
      return 32 * (2 * windows + p.bc + block_cells);
    case SparseFormat::ME_BCRS:
      return 32 * (windows + p.bc + block_cells);
    case SparseFormat::BCSR:
      return 32 * (windows + p.b + block_cells);
    case SparseFormat::TCF:
      return 32 * (windows + p.N + 3 * p.z);
    case SparseFormat::ME_TCF:
      return 32 * (windows + p.b + p.z) + 8 * p.z;
    case SparseFormat::BitTCF:
      return 32 * (windows + p.b + p.z) + p.z;
    case SparseFormat::BSB:
      return 32 * (windows + p.bc) + block_cells;
  }
  throw ValidationError("footprint_bits: unknown format");
}

FootprintParams footprint_params(const BsbMatrix& b) {
  return FootprintParams{b.n_rows(),
                         b.nnz(),
                         b.r(),
                         b.total_tcbs(),
                         b.sptd().size(),
                         static_cast<std::uint64_t>(b.r()) * b.c()};
}

std::string_view to_string(SparseFormat f) {
  switch (f) {
    case SparseFormat::CSR:
      return "CSR";
    case SparseFormat::SR_BCSR:
      return "SR_BCSR";
    case SparseFormat::ME_BCRS:
      return "ME_BCRS";
    case SparseFormat::BCSR:
      return "BCSR";
    case SparseFormat::TCF:
      return "TCF";
    case SparseFormat::ME_TCF:
      return "ME_TCF";
    case SparseFormat::BitTCF:
      return "BitTCF";
    case SparseFormat::BSB:
      return "BSB";
  }
  return "unknown";
}

SparseFormat parse_sparse_format(std::string_view name) {
  for (SparseFormat f : kFormats) {
    if (to_string(f) == name) return f;
  }
  throw ValidationError("unknown sparse format '" + std::string(name) + "'");
}

std::span<const SparseFormat> all_sparse_formats() { return kFormats; }

}  // namespace fused3s
