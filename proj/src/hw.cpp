#include "ssmfusim/hw.hpp"

#include <cmath>

namespace ssmfusim {

namespace {
constexpr std::int64_t kMiB = 1024 * 1024;
}

AcceleratorConfig marca_preset() {
  AcceleratorConfig c;
  c.pe_count = 8192;
  c.clock_hz = 1e9;
  c.onchip_bytes = 24 * kMiB;
  c.offchip_Bps = 256e9;
  c.cpo[OpKind::Exp] = 4;
  c.cpo[OpKind::SiLU] = 4;
  c.cpo[OpKind::Sigmoid] = 4;
  c.macs_per_pe_per_cycle = 1.0;
  return c;
}

AreaModel default_area_model() {
  AreaModel m;
  m.area_per_pe_mm2 = 0.2 * 222.0 / 8192.0;
  m.area_per_byte_mm2 = 0.8 * 222.0 / static_cast<double>(24 * kMiB);
  return m;
}

AreaModel calibrate_area_model(std::int64_t ref_pes, std::int64_t ref_bytes,
                               std::int64_t target_pes, std::int64_t target_bytes,
                               double total_area_mm2) {
  // Solve a*ref_pes + b*ref_bytes = A and a*target_pes + b*target_bytes = A.
  double det = static_cast<double>(ref_pes) * target_bytes -
               static_cast<double>(target_pes) * ref_bytes;
  if (det == 0) throw ConfigError("degenerate area calibration");
  double a = total_area_mm2 * (static_cast<double>(target_bytes) - ref_bytes) / det;
  double b = total_area_mm2 * (static_cast<double>(ref_pes) - target_pes) / det;
  if (a <= 0 || b <= 0) throw ConfigError("area calibration yields non-positive coefficients");
  AreaModel m;
  m.area_per_pe_mm2 = a;
  m.area_per_byte_mm2 = b;
  m.anchor_area_mm2 = total_area_mm2;
  return m;
}

double peak_ops_per_s(const AcceleratorConfig& cfg) {
  return static_cast<double>(cfg.pe_count) * cfg.clock_hz * cfg.macs_per_pe_per_cycle;
}

double bw_from_area(double total_area_mm2, const AreaModel& m) {
  return m.anchor_bw_Bps * std::sqrt(total_area_mm2 / m.anchor_area_mm2);
}

double area_of(const AcceleratorConfig& cfg, const AreaModel& m) {
  return cfg.pe_count * m.area_per_pe_mm2 + cfg.onchip_bytes * m.area_per_byte_mm2;
}

AcceleratorConfig config_from_area(double total_area_mm2, double mem_fraction,
                                   const AreaModel& m) {
  if (total_area_mm2 <= 0) throw ConfigError("total area must be positive");
  if (mem_fraction < 0 || mem_fraction > 1) throw ConfigError("mem fraction outside [0,1]");
  AcceleratorConfig c = marca_preset();
  c.onchip_bytes = static_cast<std::int64_t>(mem_fraction * total_area_mm2 / m.area_per_byte_mm2);
  c.pe_count = static_cast<std::int64_t>((1.0 - mem_fraction) * total_area_mm2 / m.area_per_pe_mm2);
  c.offchip_Bps = bw_from_area(total_area_mm2, m);
  if (c.pe_count <= 0) throw InfeasibleError("design point has zero PEs");
  return c;
}

}  // namespace ssmfusim
