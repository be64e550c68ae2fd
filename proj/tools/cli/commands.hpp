#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>

#include "fused3s/coo.hpp"
#include "fused3s/dense_matrix.hpp"
#include "fused3s/fused_attention.hpp"

namespace fused3s::cli {

enum ExitCode : int {
  kOk = 0,
  kVerificationFailed = 1,
  kIoError = 2,
  kValidationError = 3,
};

// Where a sparse matrix comes from. Exactly one of path/synthetic is set.
// Files ending in .mtx are Matrix Market, .bsb are serialized BSB, anything
// else is an edge list. The preprocessing flags apply to edge lists only.
struct InputOptions {
  std::string path;
  std::string synthetic;
  bool symmetrize = true;
  bool self_loops = true;
};

CooMatrix load_input(const InputOptions& in);

// Q, K, V for a seeded run: one splitmix64 stream drawn in Q, K, V order,
// row-major, uniform in [-1, 1) and rounded to half.
struct Operands {
  DenseMatrix q, k, v;
};
Operands seeded_operands(std::uint32_t n, std::size_t d, std::uint64_t seed);

// FNV-1a over the single-precision bit patterns of m, as 16 hex digits.
std::string checksum(const DenseMatrix& m);

struct ConvertArgs {
  InputOptions input;
  std::string output;
  std::uint32_t r = 16;
  std::uint32_t c = 8;
  bool reorder = false;
};

struct DumpArgs {
  std::string path;
  bool entries = false;
};

struct RunArgs {
  InputOptions input;
  std::uint32_t r = 16;
  std::uint32_t c = 8;
  std::size_t d = 32;
  std::uint64_t seed = 1;
  double tolerance = 5e-2;
  FusedConfig config;
};

enum class StatsFormat { json, table };

struct StatsArgs {
  InputOptions input;
  std::uint32_t r = 16;
  std::uint32_t c = 8;
  StatsFormat format = StatsFormat::table;
  bool exclude_empty = false;
};

struct SimulateArgs {
  InputOptions input;
  std::uint32_t r = 16;
  std::uint32_t c = 8;
  std::uint32_t sms = 56;
  double alpha = 1.0;
  double beta = 1.0;
  std::string order = "original";  // original | lpt | random:<seed>
  bool compare = false;            // run original and lpt side by side
  std::string trace;               // CSV path; compare mode adds .original/.lpt
};

struct BenchArgs {
  InputOptions input;
  std::uint32_t r = 16;
  std::uint32_t c = 8;
  std::size_t d = 32;
  std::uint64_t seed = 1;
  int repeat = 5;
  FusedConfig config;
  bool json = false;
};

// Each command writes its report to `out` and diagnostics to `err`, and
// returns an ExitCode; library errors never escape.
int cmd_convert(const ConvertArgs& opts, std::ostream& out, std::ostream& err);
int cmd_dump(const DumpArgs& opts, std::ostream& out, std::ostream& err);
int cmd_run(const RunArgs& opts, std::ostream& out, std::ostream& err);
int cmd_stats(const StatsArgs& opts, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateArgs& opts, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchArgs& opts, std::ostream& out, std::ostream& err);

// Runs body, mapping parse/format/I-O errors to kIoError and shape or
// validation errors to kValidationError, with the message on `err`.
int run_guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace fused3s::cli
