#include "ssmfusim/roofline.hpp"

#include <algorithm>
#include <map>

namespace ssmfusim {

double roofline_perf(double oi, const AcceleratorConfig& cfg) {
  if (oi < 0) throw ConfigError("operational intensity must be >= 0");
  return std::min(peak_ops_per_s(cfg), cfg.offchip_Bps * oi);
}

std::vector<ClassProfile> profile_model(const std::vector<OperatorDescriptor>& descriptors,
                                        const AcceleratorConfig& cfg) {
  std::map<OpClass, ClassProfile> agg;
  for (const auto& d : descriptors) {
    ClassProfile& p = agg[d.op_class];
    p.op_class = d.op_class;
    p.ops += d.ops;
    p.dram_bytes += d.read_bytes + d.write_bytes;
  }
  std::vector<ClassProfile> out;
  for (auto& [c, p] : agg) {
    p.oi = p.dram_bytes > 0 ? static_cast<double>(p.ops) / p.dram_bytes : 0.0;
    p.perf_ops_per_s = roofline_perf(p.oi, cfg);
    p.latency_s = p.perf_ops_per_s > 0 ? p.ops / p.perf_ops_per_s : 0.0;
    out.push_back(p);
  }
  return out;
}

double total_latency_s(const std::vector<ClassProfile>& profiles) {
  double s = 0;
  for (const auto& p : profiles) s += p.latency_s;
  return s;
}

OpClass dominant_class(const std::vector<ClassProfile>& profiles) {
  OpClass best = OpClass::Projection;
  double lat = -1;
  for (const auto& p : profiles)
    if (p.latency_s > lat) {
      lat = p.latency_s;
      best = p.op_class;
    }
  return best;
}

std::vector<OperatorDescriptor> mamba_descriptors(const MambaConfig& cfg) {
  MambaConfig one = cfg;
  one.n_layers = 1;
  MambaModel m = build_mamba_block(one);
  auto ds = descriptors_from_graph(m.graph);
  for (auto& d : ds) {
    d.ops *= cfg.n_layers;
    d.read_bytes *= cfg.n_layers;
    d.write_bytes *= cfg.n_layers;
  }
  return ds;
}

std::vector<ComparisonRow> compare_models(const TransformerConfig& tf,
                                          const MambaConfig& ssm, Stage stage,
                                          const std::vector<std::int64_t>& lengths,
                                          const AcceleratorConfig& cfg) {
  std::vector<ComparisonRow> rows;
  for (std::int64_t L : lengths) {
    {
      TransformerConfig c = tf;
      c.L = L;
      c.stage = stage;
      ComparisonRow r;
      r.model = "transformer";
      r.stage = stage;
      r.L = L;
      r.profiles = profile_model(build_transformer_descriptor(c), cfg);
      r.latency_s = total_latency_s(r.profiles);
      r.dominant = dominant_class(r.profiles);
      rows.push_back(std::move(r));
    }
    {
      MambaConfig c = ssm;
      c.stage = stage;
      c.L = stage == Stage::Decode ? 1 : L;
      ComparisonRow r;
      r.model = "ssm";
      r.stage = stage;
      r.L = L;
      r.profiles = profile_model(mamba_descriptors(c), cfg);
      r.latency_s = total_latency_s(r.profiles);
      r.dominant = dominant_class(r.profiles);
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

}  // namespace ssmfusim
