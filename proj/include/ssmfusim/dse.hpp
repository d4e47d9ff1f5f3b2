#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssmfusim/sim.hpp"

namespace ssmfusim {

struct DsePoint {
  double area_frac = 0;
  double mem_frac = 0;
  double area_mm2 = 0;
  std::int64_t pe_count = 0;
  std::int64_t onchip_bytes = 0;
  double bw_Bps = 0;
  int n_splits = 1;
  std::int64_t cycles = -1;
  double speedup = 0;
  std::string status;  // "ok" or "infeasible"
};

struct DseResult {
  std::vector<DsePoint> grid;
  DsePoint reference;  // 100% area at the reference machine's memory split
};

std::vector<double> default_area_fractions();  // 12.5% .. 125%, 9 points
std::vector<double> default_mem_fractions();   // 0 .. 1, 21 points

/// Evaluate the area x memory-fraction grid under one fusion scheme and
/// sequence length. Points where the hardware or the schedule is infeasible
/// are flagged, not fatal. `jobs` > 1 evaluates points concurrently; results
/// are merged by grid index.
DseResult dse_sweep(const MambaModel& model, SchemeName scheme, const AreaModel& am,
                    const std::vector<double>& area_fractions,
                    const std::vector<double>& mem_fractions, int jobs = 1,
                    const SimOptions& opts = {});

/// Minimal-latency feasible point; ties break toward smaller area, then
/// larger memory. Throws InfeasibleError when no point is feasible.
const DsePoint& best_point(const DseResult& r);

}  // namespace ssmfusim
