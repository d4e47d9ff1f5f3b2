#include "ssmfusim/dse.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace ssmfusim {

std::vector<double> default_area_fractions() {
  return {0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0, 1.25};
}

std::vector<double> default_mem_fractions() {
  std::vector<double> v;
  for (int i = 0; i <= 20; ++i) v.push_back(i * 0.05);
  return v;
}

namespace {

DsePoint eval_point(const MambaModel& model, SchemeName name, const AreaModel& am,
                    double area_frac, double mem_frac, const SimOptions& opts) {
  DsePoint p;
  p.area_frac = area_frac;
  p.mem_frac = mem_frac;
  p.area_mm2 = area_frac * am.anchor_area_mm2;
  try {
    AcceleratorConfig cfg = config_from_area(p.area_mm2, mem_frac, am);
    p.pe_count = cfg.pe_count;
    p.onchip_bytes = cfg.onchip_bytes;
    p.bw_Bps = cfg.offchip_Bps;
    FusionScheme s = scheme(name, model.cfg, cfg.onchip_bytes);
    p.n_splits = s.d_split_factor;
    Schedule sched = generate_schedule(model, s);
    SimReport r = simulate(sched, model, cfg, opts);
    p.cycles = r.total_cycles;
    p.status = "ok";
  } catch (const InfeasibleError&) {
    p.status = "infeasible";
    p.cycles = -1;
  }
  return p;
}

}  // namespace

DseResult dse_sweep(const MambaModel& model, SchemeName name, const AreaModel& am,
                    const std::vector<double>& area_fractions,
                    const std::vector<double>& mem_fractions, int jobs,
                    const SimOptions& opts) {
  if (area_fractions.empty() || mem_fractions.empty())
    throw ConfigError("dse sweep needs non-empty fraction lists");
  for (double f : area_fractions)
    if (f <= 0 || f > 1.25) throw ConfigError("area fractions must lie in (0, 1.25]");
  for (double f : mem_fractions)
    if (f < 0 || f > 1.0) throw ConfigError("mem fractions must lie in [0, 1]");

  std::vector<std::pair<double, double>> points;
  for (double a : area_fractions)
    for (double m : mem_fractions) points.push_back({a, m});

  DseResult out;
  out.grid.resize(points.size());
  int n_jobs = std::max(1, jobs);
  if (n_jobs == 1) {
    for (size_t i = 0; i < points.size(); ++i)
      out.grid[i] = eval_point(model, name, am, points[i].first, points[i].second, opts);
  } else {
    std::atomic<size_t> next{0};
    auto worker = [&]() {
      for (size_t i = next.fetch_add(1); i < points.size(); i = next.fetch_add(1))
        out.grid[i] = eval_point(model, name, am, points[i].first, points[i].second, opts);
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < n_jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Reference: 100% area at the memory split matching the anchor machine.
  AcceleratorConfig marca = marca_preset();
  double ref_mem_frac = marca.onchip_bytes * am.area_per_byte_mm2 / am.anchor_area_mm2;
  out.reference = eval_point(model, name, am, 1.0, ref_mem_frac, opts);

  if (out.reference.cycles > 0)
    for (auto& p : out.grid)
      p.speedup = p.cycles > 0 ? static_cast<double>(out.reference.cycles) / p.cycles : 0.0;
  return out;
}

const DsePoint& best_point(const DseResult& r) {
  const DsePoint* best = nullptr;
  for (const auto& p : r.grid) {
    if (p.status != "ok") continue;
    if (!best || p.cycles < best->cycles ||
        (p.cycles == best->cycles &&
         (p.area_frac < best->area_frac ||
          (p.area_frac == best->area_frac && p.mem_frac > best->mem_frac))))
      best = &p;
  }
  if (!best) throw InfeasibleError("all design points infeasible");
  return *best;
}

}  // namespace ssmfusim
