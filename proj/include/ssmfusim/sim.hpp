#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ssmfusim/fusion.hpp"
#include "ssmfusim/hw.hpp"

namespace ssmfusim {

struct SimOptions {
  bool keep_timeline = false;
  // Small-tensor retention pool: produced/fetched tensors no larger than
  // capacity/retention_divisor may stay on-chip until their last consumer.
  int retention_divisor = 16;
  // Non-local outputs with consumers beyond their group are written off-chip
  // at production time.
  bool write_through = true;
};

struct TimelineEntry {
  int op = -1;
  std::int64_t t = -1;
  int d = 0;
  OpClass op_class = OpClass::Elementwise;
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::int64_t compute_cycles = 0;
  std::int64_t transfer_cycles = 0;
  std::int64_t offchip_bytes = 0;
};

struct SimReport {
  std::int64_t total_cycles = 0;
  std::map<OpClass, std::int64_t> cycles_by_class;
  std::map<OpClass, std::int64_t> compute_cycles_by_class;
  std::map<OpClass, double> utilization_by_class;
  std::int64_t offchip_bytes_read = 0;
  std::int64_t offchip_bytes_written = 0;
  std::int64_t spill_bytes = 0;
  std::int64_t peak_onchip_bytes = 0;
  // Off-chip bytes per tensor role (layer prefix and timestep suffix folded).
  std::map<std::string, std::int64_t> traffic_by_role;
  std::vector<TimelineEntry> timeline;

  double utilization() const;
  double latency_s(const AcceleratorConfig& cfg) const {
    return total_cycles / cfg.clock_hz;
  }
};

/// Cycles to execute `scalar_ops` on the PE array with the tile's spatial
/// parallelism, scaled by the operator's CPO.
std::int64_t compute_cycles_for(std::int64_t scalar_ops, std::int64_t extent,
                                OpKind kind, const AcceleratorConfig& cfg);

/// Convenience wrapper over a whole op.
std::int64_t tile_compute_cycles(const OpNode& node, const WorkloadGraph& g,
                                 const AcceleratorConfig& cfg);

/// Execute a tile schedule against the accelerator: compute time per tile,
/// off-chip transfers for non-resident data, on-chip residency with
/// furthest-next-use eviction, and double-buffered overlap within groups.
SimReport simulate(const Schedule& schedule, const MambaModel& model,
                   const AcceleratorConfig& cfg, const SimOptions& opts = {});

/// Build the scheme and schedule for `name` and simulate.
SimReport simulate_scheme(const MambaModel& model, SchemeName name,
                          const AcceleratorConfig& cfg, const SimOptions& opts = {});

struct SweepPoint {
  std::int64_t capacity = 0;
  std::int64_t total_cycles = 0;
  int d_splits = 1;
};

/// Re-simulate under each capacity (sorted descending); MA-All recomputes its
/// D split factor per capacity.
std::vector<SweepPoint> memory_sweep(const MambaModel& model, SchemeName name,
                                     const AcceleratorConfig& cfg,
                                     const std::vector<std::int64_t>& capacities,
                                     const SimOptions& opts = {});

}  // namespace ssmfusim
