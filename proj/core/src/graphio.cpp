#include "fused3s/graphio.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "fused3s/bsb.hpp"
#include "fused3s/error.hpp"
#include "fused3s/prng.hpp"

namespace fused3s {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <class F>
void for_each_line(std::string_view text, F&& f) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    f(line_no, line);
    if (end == text.size()) break;
    pos = end + 1;
  }
}

std::uint64_t parse_uint(std::string_view token, std::size_t line, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, std::string("expected non-negative integer ") + what + ", got '" +
                               std::string(token) + "'");
  }
  return v;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

double mean_of(const std::vector<double>& xs) {
  return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double cv_of(const std::vector<double>& xs) {
  const double mean = mean_of(xs);
  if (mean == 0.0) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size())) / mean;
}

}  // namespace

CooMatrix parse_matrix_market(std::string_view text) {
  CooMatrix out;
  bool have_banner = false;
  bool have_size = false;
  bool symmetric = false;
  std::uint64_t declared = 0;
  std::uint64_t seen = 0;

  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (!have_banner) {
      const auto tok = split_ws(line);
      if (tok.size() < 5 || lower(tok[0]) != "%%matrixmarket" || lower(tok[1]) != "matrix") {
        throw ParseError(line_no, "missing %%MatrixMarket matrix header");
      }
      if (lower(tok[2]) != "coordinate") {
        throw ParseError(line_no, "only coordinate format is supported");
      }
      const std::string field = lower(tok[3]);
      if (field != "pattern" && field != "real" && field != "integer" && field != "complex") {
        throw ParseError(line_no, "unknown field type '" + std::string(tok[3]) + "'");
      }
      const std::string sym = lower(tok[4]);
      if (sym == "symmetric" || sym == "skew-symmetric" || sym == "hermitian") {
        symmetric = true;
      } else if (sym != "general") {
        throw ParseError(line_no, "unknown symmetry '" + std::string(tok[4]) + "'");
      }
      have_banner = true;
      return;
    }
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0].front() == '%') return;
    if (!have_size) {
      if (tok.size() != 3) throw ParseError(line_no, "expected 'rows cols entries'");
      const auto rows = parse_uint(tok[0], line_no, "row count");
      const auto cols = parse_uint(tok[1], line_no, "column count");
      if (rows > UINT32_MAX || cols > UINT32_MAX) throw ParseError(line_no, "matrix too large");
      out.n_rows = static_cast<std::uint32_t>(rows);
      out.n_cols = static_cast<std::uint32_t>(cols);
      declared = parse_uint(tok[2], line_no, "entry count");
      out.entries.reserve(symmetric ? 2 * declared : declared);
      have_size = true;
      return;
    }
    if (tok.size() < 2) throw ParseError(line_no, "expected 'row col [value]'");
    const auto i = parse_uint(tok[0], line_no, "row index");
    const auto j = parse_uint(tok[1], line_no, "column index");
    if (i < 1 || i > out.n_rows || j < 1 || j > out.n_cols) {
      throw ParseError(line_no, "entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                    ") outside " + std::to_string(out.n_rows) + "x" +
                                    std::to_string(out.n_cols));
    }
    if (++seen > declared) throw ParseError(line_no, "more entries than declared");
    const auto r = static_cast<std::uint32_t>(i - 1);
    const auto c = static_cast<std::uint32_t>(j - 1);
    out.entries.emplace_back(r, c);
    if (symmetric && r != c) out.entries.emplace_back(c, r);
  });

  if (!have_banner) throw ParseError(1, "empty input");
  if (!have_size) throw ParseError(0, "missing size line");
  if (seen != declared) {
    throw ParseError(0, "declared " + std::to_string(declared) + " entries, found " +
                            std::to_string(seen));
  }
  if (symmetric && out.n_rows != out.n_cols) throw ParseError(0, "symmetric matrix must be square");
  out.canonicalize();
  return out;
}

CooMatrix load_matrix_market(const std::filesystem::path& path) {
  return parse_matrix_market(read_file(path));
}

CooMatrix parse_edge_list(std::string_view text, const EdgeListOptions& opts) {
  CooMatrix out;
  std::uint64_t max_index = 0;
  bool any = false;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0].front() == '#' || tok[0].front() == '%') return;
    if (tok.size() != 2) throw ParseError(line_no, "expected two node ids");
    const auto u = parse_uint(tok[0], line_no, "node id");
    const auto v = parse_uint(tok[1], line_no, "node id");
    if (u >= UINT32_MAX || v >= UINT32_MAX) throw ParseError(line_no, "node id too large");
    out.entries.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
    max_index = std::max({max_index, u, v});
    any = true;
  });

  const std::uint64_t inferred = any ? max_index + 1 : 0;
  if (opts.n && *opts.n < inferred) {
    throw ValidationError("edge list references node " + std::to_string(max_index) +
                          " but n = " + std::to_string(*opts.n));
  }
  out.n_rows = out.n_cols = opts.n ? *opts.n : static_cast<std::uint32_t>(inferred);

  if (opts.symmetrize) {
    const std::size_t count = out.entries.size();
    for (std::size_t e = 0; e < count; ++e) {
      out.entries.emplace_back(out.entries[e].second, out.entries[e].first);
    }
  }
  if (opts.add_self_loops) {
    for (std::uint32_t i = 0; i < out.n_rows; ++i) out.entries.emplace_back(i, i);
  }
  out.canonicalize();
  return out;
}

CooMatrix load_edge_list(const std::filesystem::path& path, const EdgeListOptions& opts) {
  return parse_edge_list(read_file(path), opts);
}

SyntheticSpec parse_synthetic_spec(std::string_view text) {
  SyntheticSpec spec;
  const std::size_t colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  if (kind == "uniform") {
    spec.kind = SyntheticKind::uniform;
  } else if (kind == "power_law") {
    spec.kind = SyntheticKind::power_law;
  } else if (kind == "batched_blocks" || kind == "batched") {
    spec.kind = SyntheticKind::batched_blocks;
  } else {
    throw ValidationError("unknown synthetic kind '" + std::string(kind) + "'");
  }
  if (colon == std::string_view::npos) return spec;

  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("synthetic parameter '" + std::string(item) + "' lacks '='");
    }
    const std::string key(item.substr(0, eq));
    const std::string value(item.substr(eq + 1));
    try {
      std::size_t used = 0;
      auto as_uint = [&] {
        const auto v = std::stoull(value, &used);
        if (used != value.size() || v > UINT32_MAX) throw std::invalid_argument(value);
        return static_cast<std::uint32_t>(v);
      };
      auto as_double = [&] {
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
      };
      if (key == "n") {
        spec.n = as_uint();
      } else if (key == "density") {
        spec.density = as_double();
      } else if (key == "m") {
        spec.attach = as_uint();
      } else if (key == "components") {
        spec.components = as_uint();
      } else if (key == "size") {
        spec.min_size = spec.max_size = as_uint();
      } else if (key == "min_size") {
        spec.min_size = as_uint();
      } else if (key == "max_size") {
        spec.max_size = as_uint();
      } else if (key == "intra") {
        spec.intra_density = as_double();
      } else if (key == "seed") {
        spec.seed = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } else {
        throw ValidationError("unknown synthetic parameter '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw ValidationError("bad value '" + value + "' for synthetic parameter '" + key + "'");
    }
  }
  return spec;
}

CooMatrix generate_synthetic(const SyntheticSpec& spec) {
  SplitMix64 rng(spec.seed);
  CooMatrix out;
  switch (spec.kind) {
    case SyntheticKind::uniform: {
      if (!(spec.density >= 0.0 && spec.density <= 1.0)) {
        throw ValidationError("uniform: density must lie in [0, 1]");
      }
      out.n_rows = out.n_cols = spec.n;
      for (std::uint32_t i = 0; i < spec.n; ++i) {
        for (std::uint32_t j = 0; j < spec.n; ++j) {
          if (rng.unit() < spec.density) out.entries.emplace_back(i, j);
        }
      }
      break;
    }
    case SyntheticKind::power_law: {
      const std::uint32_t m = spec.attach;
      if (m < 1 || spec.n <= m) throw ValidationError("power_law: need 1 <= m < n");
      out.n_rows = out.n_cols = spec.n;
      // Every edge endpoint is appended to `ends`, so a uniform draw from it
      // picks a node with probability proportional to its degree. The first
      // node connects to the m seed nodes 0..m-1.
      std::vector<std::uint32_t> ends;
      ends.reserve(2ull * m * spec.n);
      std::vector<std::uint32_t> targets;
      for (std::uint32_t node = m; node < spec.n; ++node) {
        targets.clear();
        if (node == m) {
          for (std::uint32_t t = 0; t < m; ++t) targets.push_back(t);
        } else {
          while (targets.size() < m) {
            const std::uint32_t t = ends[rng.below(ends.size())];
            if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
          }
        }
        for (std::uint32_t t : targets) {
          out.entries.emplace_back(node, t);
          out.entries.emplace_back(t, node);
          ends.push_back(node);
          ends.push_back(t);
        }
      }
      break;
    }
    case SyntheticKind::batched_blocks: {
      if (spec.components == 0 || spec.min_size == 0 || spec.min_size > spec.max_size) {
        throw ValidationError("batched_blocks: need components >= 1 and 1 <= min_size <= max_size");
      }
      if (!(spec.intra_density >= 0.0 && spec.intra_density <= 1.0)) {
        throw ValidationError("batched_blocks: intra density must lie in [0, 1]");
      }
      std::vector<std::uint32_t> sizes(spec.components);
      std::uint64_t total = 0;
      for (auto& s : sizes) {
        s = spec.min_size +
            static_cast<std::uint32_t>(rng.below(spec.max_size - spec.min_size + 1ull));
        total += s;
      }
      if (total > UINT32_MAX) throw ValidationError("batched_blocks: graph too large");
      out.n_rows = out.n_cols = static_cast<std::uint32_t>(total);
      std::uint32_t base = 0;
      for (std::uint32_t s : sizes) {
        for (std::uint32_t i = 0; i < s; ++i) {
          for (std::uint32_t j = 0; j < s; ++j) {
            if (spec.intra_density >= 1.0 || rng.unit() < spec.intra_density) {
              out.entries.emplace_back(base + i, base + j);
            }
          }
        }
        base += s;
      }
      break;
    }
  }
  out.canonicalize();
  return out;
}

SparsityStats compute_stats(const CooMatrix& a, std::uint32_t r, std::uint32_t c,
                            const StatsOptions& opts) {
  const BsbMatrix b = build_bsb(a, r, c);
  SparsityStats s;
  s.r = r;
  s.c = c;
  s.nnz = b.nnz();

  std::vector<std::uint32_t> counts;
  for (std::uint32_t rw = 0; rw < b.num_rw(); ++rw) {
    const std::uint32_t t = b.tcb_count(rw);
    if (t > 0 || opts.include_empty_rws) counts.push_back(t);
  }
  s.num_rw = counts.size();
  s.total_tcbs = b.total_tcbs();

  const std::vector<double> per_rw(counts.begin(), counts.end());
  s.tcb_per_rw_avg = mean_of(per_rw);
  s.tcb_per_rw_cv = cv_of(per_rw);

  std::vector<double> per_tcb;
  per_tcb.reserve(b.total_tcbs());
  for (std::uint32_t t = 0; t < b.total_tcbs(); ++t) {
    std::uint32_t bits = 0;
    for (std::uint8_t byte : b.bitmap(t)) bits += static_cast<std::uint32_t>(std::popcount(byte));
    if (bits > 0) per_tcb.push_back(bits);
  }
  s.nnz_per_tcb_avg = mean_of(per_tcb);
  s.nnz_per_tcb_cv = cv_of(per_tcb);

  std::sort(counts.begin(), counts.end());
  const std::size_t base = counts.size() / 10;
  const std::size_t extra = counts.size() % 10;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < 10; ++k) {
    const std::size_t size = base + (k < extra ? 1 : 0);
    DecileRange& dr = s.deciles[k];
    dr.size = static_cast<std::uint32_t>(size);
    if (size > 0) {
      dr.min = counts[pos];
      dr.max = counts[pos + size - 1];
    }
    pos += size;
  }
  return s;
}

std::string stats_to_json(const SparsityStats& s, std::string_view name) {
  nlohmann::json j;
  if (!name.empty()) j["name"] = name;
  j["r"] = s.r;
  j["c"] = s.c;
  j["num_rw"] = s.num_rw;
  j["total_tcbs"] = s.total_tcbs;
  j["nnz"] = s.nnz;
  j["tcb_per_rw"] = {{"avg", s.tcb_per_rw_avg}, {"cv", s.tcb_per_rw_cv}};
  j["nnz_per_tcb"] = {{"avg", s.nnz_per_tcb_avg}, {"cv", s.nnz_per_tcb_cv}};
  nlohmann::json deciles = nlohmann::json::array();
  for (const auto& d : s.deciles) deciles.push_back({{"size", d.size}, {"min", d.min}, {"max", d.max}});
  j["deciles"] = deciles;
  return j.dump(2);
}

std::string stats_to_table(const SparsityStats& s, std::string_view name) {
  const std::string_view label = name.empty() ? std::string_view("-") : name;
  const int name_width = static_cast<int>(std::max<std::size_t>(16, label.size() + 2));
  std::ostringstream out;
  out << std::fixed;
  out << std::left << std::setw(name_width) << "Name" << std::right << std::setw(10) << "RWs"
      << std::setw(12) << "Edges" << std::setw(10) << "TCB/RW" << std::setw(8) << "CV"
      << std::setw(10) << "nnz/TCB" << std::setw(8) << "CV" << '\n';
  out << std::left << std::setw(name_width) << label << std::right
      << std::setw(10) << s.num_rw << std::setw(12) << s.nnz << std::setprecision(1)
      << std::setw(10) << s.tcb_per_rw_avg << std::setprecision(2) << std::setw(8)
      << s.tcb_per_rw_cv << std::setprecision(1) << std::setw(10) << s.nnz_per_tcb_avg
      << std::setprecision(2) << std::setw(8) << s.nnz_per_tcb_cv << '\n';
  out << '\n' << std::left << std::setw(8) << "Decile" << std::right << std::setw(8) << "Size"
      << std::setw(14) << "TCB range" << '\n';
  for (std::size_t k = 0; k < s.deciles.size(); ++k) {
    const auto& d = s.deciles[k];
    const std::string range = std::to_string(d.min) + "-" + std::to_string(d.max);
    out << std::left << std::setw(8) << (k + 1) << std::right << std::setw(8) << d.size
        << std::setw(14) << range << '\n';
  }
  return out.str();
}

}  // namespace fused3s
