#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace fused3s {

// cost(RW) = alpha + beta * t, in abstract time units.
struct CostModel {
  double alpha = 1.0;
  double beta = 1.0;

  double cost(std::uint64_t tcbs) const { return alpha + beta * static_cast<double>(tcbs); }
};

struct ScheduleInterval {
  std::uint32_t sm = 0;
  std::uint32_t rw = 0;
  double start = 0.0;
  double end = 0.0;
};

struct ScheduleTrace {
  std::uint32_t num_sms = 0;
  std::vector<std::vector<ScheduleInterval>> per_sm;
  std::vector<double> active_time;
  double makespan = 0.0;

  double min_active() const;
  double max_active() const;
  // max_active / mean active time over all SMs; 1.0 for a perfectly even
  // load (and for an empty schedule).
  double imbalance_ratio() const;
};

// Greedy list scheduling: jobs are taken in `order`, each placed on the SM
// that frees up first (lowest index on ties). Throws ValidationError when
// num_sms is 0, the cost model is invalid, or `order` is not a permutation.
ScheduleTrace simulate_schedule(std::span<const std::uint32_t> tcb_counts,
                                std::span<const std::uint32_t> order, std::uint32_t num_sms,
                                const CostModel& cm = {});

// Same, on arbitrary job costs.
ScheduleTrace simulate_costs(std::span<const double> costs, std::span<const std::uint32_t> order,
                             std::uint32_t num_sms);

// Longest-processing-time order: cost descending, index ascending on ties.
std::vector<std::uint32_t> lpt_order(std::span<const std::uint32_t> tcb_counts);
std::vector<std::uint32_t> lpt_order(std::span<const double> costs);

// Exact minimum makespan by exhaustive search. Limited to 12 jobs and 4 SMs;
// larger instances throw ValidationError.
double brute_force_optimum(std::span<const double> costs, std::uint32_t num_sms);

// Load transactions for gathering `gather_rows` row segments of
// `bytes_per_row_segment` bytes each. Remapped loads are 128-bit wide;
// unremapped loads fetch one 16-bit element each.
std::uint64_t transaction_count(std::uint64_t gather_rows, std::uint64_t bytes_per_row_segment,
                                bool remapped);

// CSV with header "sm_id,rw_id,start,end".
void write_trace_csv(std::ostream& out, const ScheduleTrace& trace);

}  // namespace fused3s
