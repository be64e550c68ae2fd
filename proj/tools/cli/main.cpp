#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "commands.hpp"

namespace {

using namespace fused3s;

void add_input(CLI::App* cmd, cli::InputOptions& in) {
  cmd->add_option("input", in.path, "Matrix Market (.mtx), BSB (.bsb) or edge-list file");
  cmd->add_option("--synthetic", in.synthetic,
                  "Generated graph, e.g. power_law:n=1000,m=4,seed=3 or uniform:n=256,density=0.05");
  cmd->add_flag("--symmetrize,!--no-symmetrize", in.symmetrize,
                "Edge lists: add the reverse of every edge (default on)");
  cmd->add_flag("--self-loops,!--no-self-loops", in.self_loops,
                "Edge lists: add a self loop to every node (default on)");
}

void add_tiling(CLI::App* cmd, std::uint32_t& r, std::uint32_t& c) {
  cmd->add_option("-r,--rows", r, "Row-window height")->capture_default_str();
  cmd->add_option("-c,--cols", c, "TCB width")->capture_default_str();
}

// Enum-valued flags are parsed as strings and mapped once parsing is done.
struct EngineNames {
  std::string partition = "split_column";
  std::string schedule = "original";

  void apply(FusedConfig& cfg) const {
    cfg.warp_partition =
        partition == "split_row" ? WarpPartition::split_row : WarpPartition::split_column;
    cfg.rw_schedule = schedule == "reordered" ? RwSchedule::reordered : RwSchedule::original;
  }
};

void add_engine(CLI::App* cmd, FusedConfig& cfg, EngineNames& names) {
  cmd->add_option("--partition", names.partition, "Warp partition")
      ->check(CLI::IsMember({"split_column", "split_row"}))
      ->capture_default_str();
  cmd->add_option("--schedule", names.schedule, "Row-window order")
      ->check(CLI::IsMember({"original", "reordered"}))
      ->capture_default_str();
  cmd->add_flag("--remap", cfg.apply_remap, "Apply the fragment-contiguous feature layout");
  cmd->add_option("--warps", cfg.warps_per_block, "Warps per block (W)")->capture_default_str();
  cmd->add_option("--threads", cfg.num_threads, "Worker threads over row windows")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fused sparse attention (SDDMM, softmax, SpMM) CPU emulator"};
  app.require_subcommand(1);

  cli::ConvertArgs convert;
  auto* c_cmd = app.add_subcommand("convert", "Build a BSB file from a sparse matrix");
  add_input(c_cmd, convert.input);
  c_cmd->add_option("-o,--output", convert.output, "Output .bsb path")->required();
  add_tiling(c_cmd, convert.r, convert.c);
  c_cmd->add_flag("--reorder", convert.reorder, "Store row windows in descending TCB-count order");

  cli::DumpArgs dump;
  auto* d_cmd = app.add_subcommand("dump", "Print a BSB file as JSON");
  d_cmd->add_option("input", dump.path, "BSB file")->required();
  d_cmd->add_flag("--entries", dump.entries, "Also list the decoded (row, col) entries");

  cli::RunArgs run;
  auto* r_cmd = app.add_subcommand("run", "Run the fused forward pass and check it against the dense oracle");
  add_input(r_cmd, run.input);
  add_tiling(r_cmd, run.r, run.c);
  r_cmd->add_option("-d,--dim", run.d, "Feature dimension")->capture_default_str();
  r_cmd->add_option("--seed", run.seed, "Seed for Q, K, V")->capture_default_str();
  r_cmd->add_option("--tolerance", run.tolerance, "Max abs error for a pass")->capture_default_str();
  EngineNames run_names;
  add_engine(r_cmd, run.config, run_names);

  cli::StatsArgs stats;
  auto* s_cmd = app.add_subcommand("stats", "TCB-per-row-window and nnz-per-TCB statistics");
  add_input(s_cmd, stats.input);
  add_tiling(s_cmd, stats.r, stats.c);
  std::string stats_format = "table";
  s_cmd->add_option("--format", stats_format, "Output format")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
  s_cmd->add_flag("--exclude-empty", stats.exclude_empty, "Skip row windows without TCBs");

  cli::SimulateArgs sim;
  auto* m_cmd = app.add_subcommand("simulate", "Simulate row-window scheduling across SMs");
  add_input(m_cmd, sim.input);
  add_tiling(m_cmd, sim.r, sim.c);
  m_cmd->add_option("--sms", sim.sms, "Number of SMs")->capture_default_str();
  m_cmd->add_option("--alpha", sim.alpha, "Fixed cost per row window")->capture_default_str();
  m_cmd->add_option("--beta", sim.beta, "Cost per TCB")->capture_default_str();
  m_cmd->add_option("--order", sim.order, "original, lpt or random:<seed>")->capture_default_str();
  m_cmd->add_flag("--compare", sim.compare, "Simulate original and lpt orders and report the ratio");
  m_cmd->add_option("--trace", sim.trace, "Write the per-SM trace CSV here");

  cli::BenchArgs bench;
  auto* b_cmd = app.add_subcommand("bench", "Time the fused and unfused paths and track their scratch memory");
  add_input(b_cmd, bench.input);
  add_tiling(b_cmd, bench.r, bench.c);
  b_cmd->add_option("-d,--dim", bench.d, "Feature dimension")->capture_default_str();
  b_cmd->add_option("--seed", bench.seed, "Seed for Q, K, V")->capture_default_str();
  b_cmd->add_option("--repeat", bench.repeat, "Runs per path")->capture_default_str();
  b_cmd->add_flag("--json", bench.json, "Machine-readable output");
  EngineNames bench_names;
  add_engine(b_cmd, bench.config, bench_names);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kValidationError;
  }

  run_names.apply(run.config);
  bench_names.apply(bench.config);
  stats.format = stats_format == "json" ? cli::StatsFormat::json : cli::StatsFormat::table;

  auto& out = std::cout;
  auto& err = std::cerr;
  if (*c_cmd) return cli::cmd_convert(convert, out, err);
  if (*d_cmd) return cli::cmd_dump(dump, out, err);
  if (*r_cmd) return cli::cmd_run(run, out, err);
  if (*s_cmd) return cli::cmd_stats(stats, out, err);
  if (*m_cmd) return cli::cmd_simulate(sim, out, err);
  return cli::cmd_bench(bench, out, err);
}
