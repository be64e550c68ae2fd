#include "fused3s/schedsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "fused3s/error.hpp"
#include "fused3s/ordering.hpp"

namespace fused3s {

namespace {

struct SearchState {
  std::span<const double> costs;  // sorted descending
  std::vector<double> loads;
  double best = std::numeric_limits<double>::infinity();
};

void search(SearchState& st, std::size_t job, std::size_t used) {
  if (job == st.costs.size()) {
    st.best = std::min(st.best, *std::max_element(st.loads.begin(), st.loads.end()));
    return;
  }
  // Machines beyond the first unused one are interchangeable with it.
  const std::size_t limit = std::min(st.loads.size(), used + 1);
  for (std::size_t m = 0; m < limit; ++m) {
    const double next = st.loads[m] + st.costs[job];
    if (next >= st.best) continue;
    st.loads[m] = next;
    search(st, job + 1, std::max(used, m + 1));
    st.loads[m] -= st.costs[job];
  }
}

}  // namespace

double ScheduleTrace::min_active() const {
  return active_time.empty() ? 0.0 : *std::min_element(active_time.begin(), active_time.end());
}

double ScheduleTrace::max_active() const {
  return active_time.empty() ? 0.0 : *std::max_element(active_time.begin(), active_time.end());
}

double ScheduleTrace::imbalance_ratio() const {
  if (active_time.empty()) return 1.0;
  const double mean = std::accumulate(active_time.begin(), active_time.end(), 0.0) /
                      static_cast<double>(active_time.size());
  return mean > 0.0 ? max_active() / mean : 1.0;
}

ScheduleTrace simulate_costs(std::span<const double> costs, std::span<const std::uint32_t> order,
                             std::uint32_t num_sms) {
  if (num_sms == 0) throw ValidationError("simulate_schedule: need at least one SM");
  if (order.size() != costs.size() || !is_permutation_of_iota(order)) {
    throw ValidationError("simulate_schedule: order is not a permutation of the jobs");
  }
  ScheduleTrace trace;
  trace.num_sms = num_sms;
  trace.per_sm.resize(num_sms);
  trace.active_time.assign(num_sms, 0.0);
  for (std::uint32_t job : order) {
    const auto sm = static_cast<std::uint32_t>(
        std::min_element(trace.active_time.begin(), trace.active_time.end()) -
        trace.active_time.begin());
    const double start = trace.active_time[sm];
    const double end = start + costs[job];
    trace.per_sm[sm].push_back({sm, job, start, end});
    trace.active_time[sm] = end;
  }
  trace.makespan = trace.max_active();
  return trace;
}

ScheduleTrace simulate_schedule(std::span<const std::uint32_t> tcb_counts,
                                std::span<const std::uint32_t> order, std::uint32_t num_sms,
                                const CostModel& cm) {
  if (!(cm.alpha >= 0.0) || !(cm.beta > 0.0)) {
    throw ValidationError("cost model needs alpha >= 0 and beta > 0");
  }
  std::vector<double> costs(tcb_counts.size());
  for (std::size_t i = 0; i < costs.size(); ++i) costs[i] = cm.cost(tcb_counts[i]);
  return simulate_costs(costs, order, num_sms);
}

std::vector<std::uint32_t> lpt_order(std::span<const std::uint32_t> tcb_counts) {
  return stable_descending_order(tcb_counts);
}

std::vector<std::uint32_t> lpt_order(std::span<const double> costs) {
  return stable_descending_order(costs);
}

double brute_force_optimum(std::span<const double> costs, std::uint32_t num_sms) {
  if (num_sms == 0) throw ValidationError("brute_force_optimum: need at least one SM");
  if (costs.size() > 12 || num_sms > 4) {
    throw ValidationError("brute_force_optimum: instance too large (max 12 jobs, 4 SMs)");
  }
  if (costs.empty()) return 0.0;
  std::vector<double> sorted(costs.begin(), costs.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  SearchState st{sorted, std::vector<double>(num_sms, 0.0)};
  search(st, 0, 0);
  return st.best;
}

std::uint64_t transaction_count(std::uint64_t gather_rows, std::uint64_t bytes_per_row_segment,
                                bool remapped) {
  if (bytes_per_row_segment == 0) {
    throw ValidationError("transaction_count: segment size must be positive");
  }
  constexpr std::uint64_t kWideLoadBytes = 16;  // one 128-bit load
  constexpr std::uint64_t kElementBytes = 2;    // one half element
  const std::uint64_t per_segment =
      remapped ? (bytes_per_row_segment + kWideLoadBytes - 1) / kWideLoadBytes
               : (bytes_per_row_segment + kElementBytes - 1) / kElementBytes;
  return gather_rows * per_segment;
}

void write_trace_csv(std::ostream& out, const ScheduleTrace& trace) {
  out << "sm_id,rw_id,start,end\n";
  for (const auto& sm : trace.per_sm) {
    for (const auto& iv : sm) out << iv.sm << ',' << iv.rw << ',' << iv.start << ',' << iv.end << '\n';
  }
}

}  // namespace fused3s
