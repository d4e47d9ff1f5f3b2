#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ssmfusim/graph.hpp"

namespace ssmfusim {

/// Parameterized single-core accelerator: a flat PE array fed from on-chip
/// SRAM, with off-chip bandwidth as the only transfer bottleneck. Per-kind
/// cycles-per-operation capture multi-cycle operators.
struct AcceleratorConfig {
  std::int64_t pe_count = 0;
  double clock_hz = 1e9;
  std::int64_t onchip_bytes = 0;
  double offchip_Bps = 0;
  std::map<OpKind, int> cpo;
  double macs_per_pe_per_cycle = 1.0;  // per-PE scalar op rate

  int cpo_for(OpKind k) const {
    auto it = cpo.find(k);
    return it == cpo.end() ? 1 : it->second;
  }
  double bytes_per_cycle() const { return offchip_Bps / clock_hz; }
};

/// 8192 PEs, 24 MiB SRAM, 256 GB/s, 1 GHz; exp/SiLU/sigmoid take 4 cycles.
AcceleratorConfig marca_preset();

/// Silicon cost split between PE array and SRAM, anchored at a reference die.
struct AreaModel {
  double area_per_pe_mm2 = 0;
  double area_per_byte_mm2 = 0;
  double anchor_area_mm2 = 222.0;
  double anchor_bw_Bps = 256e9;
};

/// 20% of 222 mm2 buys 8192 PEs, 80% buys 24 MiB.
AreaModel default_area_model();

/// Coefficients chosen so that both (8192 PEs, 24 MiB) and a target
/// (pe, bytes) design land on the same total area.
AreaModel calibrate_area_model(std::int64_t ref_pes, std::int64_t ref_bytes,
                               std::int64_t target_pes, std::int64_t target_bytes,
                               double total_area_mm2 = 222.0);

double peak_ops_per_s(const AcceleratorConfig& cfg);

/// Off-chip bandwidth grows with die perimeter: anchor_bw * sqrt(area/anchor).
double bw_from_area(double total_area_mm2, const AreaModel& m);

double area_of(const AcceleratorConfig& cfg, const AreaModel& m);

/// Split a die between SRAM (mem_fraction of area) and PEs; throws
/// InfeasibleError when the compute share rounds to zero PEs.
AcceleratorConfig config_from_area(double total_area_mm2, double mem_fraction,
                                   const AreaModel& m);

}  // namespace ssmfusim
