#include "commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "fused3s/alloc_tracker.hpp"
#include "fused3s/bsb.hpp"
#include "fused3s/error.hpp"
#include "fused3s/graphio.hpp"
#include "fused3s/oracles.hpp"
#include "fused3s/prng.hpp"
#include "fused3s/schedsim.hpp"

namespace fused3s::cli {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

bool has_extension(const std::string& path, std::string_view ext) {
  return std::filesystem::path(path).extension() == ext;
}

std::string input_name(const InputOptions& in) {
  return in.synthetic.empty() ? std::filesystem::path(in.path).filename().string() : in.synthetic;
}

// BSB files keep their own tiling; everything else is built with (r, c).
BsbMatrix load_bsb(const InputOptions& in, std::uint32_t r, std::uint32_t c) {
  if (in.synthetic.empty() && has_extension(in.path, ".bsb")) return read_bsb_file(in.path);
  return build_bsb(load_input(in), r, c);
}

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

struct ErrorStats {
  double max_abs = 0.0;
  double mean_abs = 0.0;
};

ErrorStats compare(const DenseMatrix& got, const DenseMatrix& want) {
  ErrorStats e;
  const auto a = got.data();
  const auto b = want.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = std::fabs(a[i] - b[i]);
    // NaN must fail the comparison, so it cannot be folded with std::max.
    e.max_abs = (diff > e.max_abs || std::isnan(diff)) ? diff : e.max_abs;
    e.mean_abs += diff;
  }
  if (!a.empty()) e.mean_abs /= static_cast<double>(a.size());
  return e;
}

std::vector<std::uint32_t> schedule_order(const std::string& spec, const BsbMatrix& a) {
  const auto counts = a.tcb_counts();
  if (spec == "original") {
    std::vector<std::uint32_t> order(counts.size());
    std::iota(order.begin(), order.end(), 0u);
    return order;
  }
  if (spec == "lpt") return lpt_order(counts);
  if (spec.rfind("random:", 0) == 0) {
    std::uint64_t seed = 0;
    try {
      std::size_t used = 0;
      seed = std::stoull(spec.substr(7), &used);
      if (used != spec.size() - 7) throw std::invalid_argument(spec);
    } catch (const std::exception&) {
      throw ValidationError("--order random:<seed> needs an integer seed, got '" + spec + "'");
    }
    std::vector<std::uint32_t> order(counts.size());
    std::iota(order.begin(), order.end(), 0u);
    SplitMix64 rng(seed);
    for (std::size_t j = order.size(); j > 1; --j) std::swap(order[j - 1], order[rng.below(j)]);
    return order;
  }
  throw ValidationError("--order must be original, lpt or random:<seed>, got '" + spec + "'");
}

json trace_summary(const ScheduleTrace& t) {
  return {{"makespan", t.makespan},
          {"min_active", t.min_active()},
          {"max_active", t.max_active()},
          {"imbalance_ratio", t.imbalance_ratio()}};
}

void write_trace_file(const std::string& path, const ScheduleTrace& t) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write trace file '" + path + "'");
  write_trace_csv(f, t);
  if (!f) throw IoError("failed writing trace file '" + path + "'");
}

std::string with_suffix(const std::string& path, std::string_view tag) {
  std::filesystem::path p(path);
  const auto ext = p.extension().string();
  p.replace_extension();
  return p.string() + "." + std::string(tag) + (ext.empty() ? ".csv" : ext);
}

std::string hex_bytes(std::span<const std::uint8_t> bytes) {
  std::ostringstream s;
  s << std::hex << std::setfill('0');
  for (auto b : bytes) s << std::setw(2) << static_cast<int>(b);
  return s.str();
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

CooMatrix load_input(const InputOptions& in) {
  if (!in.synthetic.empty()) {
    if (!in.path.empty()) throw ValidationError("give either an input path or --synthetic, not both");
    return generate_synthetic(parse_synthetic_spec(in.synthetic));
  }
  if (in.path.empty()) throw ValidationError("no input: give a path or --synthetic");
  if (has_extension(in.path, ".mtx")) return load_matrix_market(in.path);
  if (has_extension(in.path, ".bsb")) return to_coo(read_bsb_file(in.path));
  return load_edge_list(in.path, {in.symmetrize, in.self_loops, std::nullopt});
}

Operands seeded_operands(std::uint32_t n, std::size_t d, std::uint64_t seed) {
  SplitMix64 rng(seed);
  auto draw = [&] {
    std::vector<double> values(static_cast<std::size_t>(n) * d);
    for (auto& x : values) x = rng.symmetric();
    return DenseMatrix::from_values(n, d, std::move(values), Precision::half);
  };
  auto q = draw();
  auto k = draw();
  auto v = draw();
  return {std::move(q), std::move(k), std::move(v)};
}

std::string checksum(const DenseMatrix& m) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (double x : m.data()) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(x));
    for (int s = 0; s < 32; s += 8) {
      h ^= (bits >> s) & 0xFFu;
      h *= 0x100000001B3ull;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kIoError;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return kIoError;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const ShapeError& e) {
    err << "shape error: " << e.what() << '\n';
    return kValidationError;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }
}

int cmd_convert(const ConvertArgs& opts, std::ostream& out, std::ostream& err) {
  return run_guarded([&] {
    BsbMatrix b = build_bsb(load_input(opts.input), opts.r, opts.c);
    if (opts.reorder) b = reorder_row_windows(b);
    write_bsb_file(opts.output, b);
    out << "wrote " << opts.output << ": " << b.n_rows() << "x" << b.n_cols() << ", " << b.num_rw()
        << " row windows, " << b.total_tcbs() << " TCBs, " << b.nnz() << " nonzeros\n";
    return kOk;
  }, err);
}

int cmd_dump(const DumpArgs& opts, std::ostream& out, std::ostream& err) {
  return run_guarded([&] {
    const BsbMatrix b = read_bsb_file(opts.path);
    json j;
    j["n_rows"] = b.n_rows();
    j["n_cols"] = b.n_cols();
    j["r"] = b.r();
    j["c"] = b.c();
    j["num_rw"] = b.num_rw();
    j["total_tcbs"] = b.total_tcbs();
    j["nnz"] = b.nnz();
    j["tro"] = std::vector<std::uint32_t>(b.tro().begin(), b.tro().end());
    j["sptd_offsets"] = std::vector<std::uint32_t>(b.sptd_offsets().begin(), b.sptd_offsets().end());
    j["sptd"] = std::vector<std::uint32_t>(b.sptd().begin(), b.sptd().end());
    json bitmaps = json::array();
    const std::size_t stride = b.bytes_per_tcb();
    for (std::size_t t = 0; t < b.total_tcbs(); ++t)
      bitmaps.push_back(hex_bytes(b.bitmaps().subspan(t * stride, stride)));
    j["bitmaps"] = bitmaps;
    j["rw_order"] = std::vector<std::uint32_t>(b.rw_order().begin(), b.rw_order().end());
    if (opts.entries) j["entries"] = to_coo(b).entries;
    out << j.dump(2) << '\n';
    return kOk;
  }, err);
}

int cmd_run(const RunArgs& opts, std::ostream& out, std::ostream& err) {
  return run_guarded([&] {
    if (!(opts.tolerance >= 0.0)) throw ValidationError("--tolerance must be nonnegative");
    if (opts.d == 0) throw ValidationError("-d must be at least 1");
    validate(opts.config);
    const BsbMatrix a = load_bsb(opts.input, opts.r, opts.c);
    if (a.n_rows() != a.n_cols()) throw ShapeError("attention needs a square adjacency matrix");
    const CooMatrix coo = to_coo(a);
    const Operands ops = seeded_operands(a.n_rows(), opts.d, opts.seed);

    auto start = Clock::now();
    const DenseMatrix o = fused3s_forward(a, ops.q, ops.k, ops.v, opts.config);
    const double fused_ms = elapsed_ms(start);
    start = Clock::now();
    const DenseMatrix ref = dense_attention_oracle(coo, ops.q, ops.k, ops.v, Precision::double_);
    const double oracle_ms = elapsed_ms(start);

    const ErrorStats e = compare(o, ref);
    const bool pass = e.max_abs <= opts.tolerance;
    json report;
    report["instance"] = {{"name", input_name(opts.input)}, {"N", a.n_rows()}, {"d", opts.d},
                          {"nnz", a.nnz()}, {"r", a.r()}, {"c", a.c()}, {"seed", opts.seed}};
    report["config"] = {{"tile", {opts.config.tile.m, opts.config.tile.n, opts.config.tile.k}},
                        {"warps_per_block", opts.config.warps_per_block},
                        {"partition", to_string(opts.config.warp_partition)},
                        {"remap", opts.config.apply_remap},
                        {"schedule", to_string(opts.config.rw_schedule)},
                        {"threads", opts.config.num_threads}};
    report["max_abs_err"] = e.max_abs;
    report["mean_abs_err"] = e.mean_abs;
    report["tolerance"] = opts.tolerance;
    report["time_ms"] = {{"fused", fused_ms}, {"dense_oracle", oracle_ms}};
    report["checksum"] = checksum(o);
    report["pass"] = pass;
    out << report.dump(2) << '\n';
    return pass ? kOk : kVerificationFailed;
  }, err);
}

int cmd_stats(const StatsArgs& opts, std::ostream& out, std::ostream& err) {
  return run_guarded([&] {
    const auto s = compute_stats(load_input(opts.input), opts.r, opts.c, {!opts.exclude_empty});
    const std::string name = input_name(opts.input);
    out << (opts.format == StatsFormat::json ? stats_to_json(s, name) + "\n" : stats_to_table(s, name));
    return kOk;
  }, err);
}

int cmd_simulate(const SimulateArgs& opts, std::ostream& out, std::ostream& err) {
  return run_guarded([&] {
    const BsbMatrix a = load_bsb(opts.input, opts.r, opts.c);
    const auto counts = a.tcb_counts();
    const CostModel cm{opts.alpha, opts.beta};
    json summary;
    summary["instance"] = {{"name", input_name(opts.input)}, {"num_rw", a.num_rw()},
                           {"total_tcbs", a.total_tcbs()}};
    summary["sms"] = opts.sms;
    summary["cost_model"] = {{"alpha", opts.alpha}, {"beta", opts.beta}};
    if (opts.compare) {
      const auto original = simulate_schedule(counts, schedule_order("original", a), opts.sms, cm);
      const auto lpt = simulate_schedule(counts, schedule_order("lpt", a), opts.sms, cm);
      summary["original"] = trace_summary(original);
      summary["lpt"] = trace_summary(lpt);
      summary["makespan_ratio_original_over_lpt"] =
          lpt.makespan > 0 ? original.makespan / lpt.makespan : 1.0;
      if (!opts.trace.empty()) {
        write_trace_file(with_suffix(opts.trace, "original"), original);
        write_trace_file(with_suffix(opts.trace, "lpt"), lpt);
      }
    } else {
      const auto trace = simulate_schedule(counts, schedule_order(opts.order, a), opts.sms, cm);
      summary["order"] = opts.order;
      summary.update(trace_summary(trace));
      if (!opts.trace.empty()) write_trace_file(opts.trace, trace);
    }
    out << summary.dump(2) << '\n';
    return kOk;
  }, err);
}

int cmd_bench(const BenchArgs& opts, std::ostream& out, std::ostream& err) {
  return run_guarded([&] {
    if (opts.repeat < 1) throw ValidationError("--repeat must be at least 1");
    if (opts.d == 0) throw ValidationError("-d must be at least 1");
    validate(opts.config);
    const BsbMatrix a = load_bsb(opts.input, opts.r, opts.c);
    if (a.n_rows() != a.n_cols()) throw ShapeError("attention needs a square adjacency matrix");
    const CooMatrix coo = to_coo(a);
    const Operands ops = seeded_operands(a.n_rows(), opts.d, opts.seed);

    std::vector<double> fused_ms, unfused_ms;
    std::size_t fused_peak = 0, unfused_peak = 0;
    std::string fused_sum, unfused_sum;
    for (int i = 0; i < opts.repeat; ++i) {
      {
        PeakScope scope;
        const auto start = Clock::now();
        const auto o = fused3s_forward(a, ops.q, ops.k, ops.v, opts.config);
        fused_ms.push_back(elapsed_ms(start));
        fused_peak = std::max(fused_peak, scope.peak_delta());
        fused_sum = checksum(o);
      }
      {
        PeakScope scope;
        const auto start = Clock::now();
        const auto o = unfused_3s_oracle(coo, ops.q, ops.k, ops.v, {});
        unfused_ms.push_back(elapsed_ms(start));
        unfused_peak = std::max(unfused_peak, scope.peak_delta());
        unfused_sum = checksum(o);
      }
    }

    const std::size_t n = a.n_rows();
    const std::size_t bound = fused_scratch_bound(a, opts.config);
    // The fused path must stay within its per-worker block buffers, which
    // are sized by r, c, W and thread count and never by N or nnz.
    const bool fused_ok = fused_peak <= bound;
    const bool unfused_materializes = unfused_peak >= 2 * n * n * sizeof(double);
    const bool ok = fused_ok && unfused_materializes;

    auto spread = [](const std::vector<double>& xs) {
      const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
      return std::make_pair(*lo, *hi);
    };
    const auto [f_lo, f_hi] = spread(fused_ms);
    const auto [u_lo, u_hi] = spread(unfused_ms);
    if (opts.json) {
      json j;
      j["note"] = "CPU emulation timings; not comparable to GPU kernel measurements";
      j["instance"] = {{"name", input_name(opts.input)}, {"N", n}, {"d", opts.d}, {"nnz", a.nnz()},
                       {"repeat", opts.repeat}, {"threads", opts.config.num_threads}};
      j["fused"] = {{"median_ms", median(fused_ms)}, {"min_ms", f_lo}, {"max_ms", f_hi},
                    {"peak_scratch_bytes", fused_peak}, {"scratch_bound_bytes", bound},
                    {"checksum", fused_sum}};
      j["unfused"] = {{"median_ms", median(unfused_ms)}, {"min_ms", u_lo}, {"max_ms", u_hi},
                      {"peak_scratch_bytes", unfused_peak}, {"checksum", unfused_sum}};
      j["fused_avoids_quadratic_scratch"] = fused_ok;
      j["unfused_materializes_quadratic_scratch"] = unfused_materializes;
      out << j.dump(2) << '\n';
    } else {
      out << "CPU emulation timings; not comparable to GPU kernel measurements\n"
          << input_name(opts.input) << ": N=" << n << " d=" << opts.d << " nnz=" << a.nnz()
          << " repeat=" << opts.repeat << "\n\n"
          << std::left << std::setw(10) << "path" << std::right << std::setw(12) << "median ms"
          << std::setw(12) << "min ms" << std::setw(12) << "max ms" << std::setw(16)
          << "peak scratch B" << "  checksum\n"
          << std::fixed << std::setprecision(3);
      out << std::left << std::setw(10) << "fused" << std::right << std::setw(12) << median(fused_ms)
          << std::setw(12) << f_lo << std::setw(12) << f_hi << std::setw(16) << fused_peak << "  "
          << fused_sum << '\n';
      out << std::left << std::setw(10) << "unfused" << std::right << std::setw(12)
          << median(unfused_ms) << std::setw(12) << u_lo << std::setw(12) << u_hi << std::setw(16)
          << unfused_peak << "  " << unfused_sum << "\n\n";
      out << "fused scratch within per-block bound (" << bound << " B): " << (fused_ok ? "yes" : "NO")
          << '\n'
          << "unfused path materializes N x N S and E: " << (unfused_materializes ? "yes" : "NO")
          << '\n';
    }
    return ok ? kOk : kVerificationFailed;
  }, err);
}

}  // namespace fused3s::cli
