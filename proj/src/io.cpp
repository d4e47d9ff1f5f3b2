#include "ssmfusim/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ssmfusim {

using nlohmann::json;

namespace {

std::string fmt(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

std::string fmt_sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9e", v);
  return buf;
}

}  // namespace

std::string workload_to_json(const WorkloadGraph& g) {
  json j;
  j["stage"] = to_string(g.stage);
  json ts = json::array();
  for (const auto& t : g.tensors) {
    json jt;
    jt["id"] = t.id;
    jt["name"] = t.name;
    json dims = json::array();
    for (const auto& d : t.dims) dims.push_back(json::array({d.name, d.extent}));
    jt["dims"] = dims;
    jt["bits"] = t.element_bits;
    jt["kind"] = to_string(t.kind);
    ts.push_back(std::move(jt));
  }
  j["tensors"] = std::move(ts);
  json os = json::array();
  for (const auto& n : g.ops) {
    json jo;
    jo["id"] = n.id;
    jo["kind"] = to_string(n.kind);
    json attrs = json::object();
    if (n.attrs.axis >= 0) attrs["axis"] = n.attrs.axis;
    if (n.attrs.index >= 0) attrs["index"] = n.attrs.index;
    if (!n.attrs.parts.empty()) attrs["parts"] = n.attrs.parts;
    if (n.attrs.part >= 0) attrs["part"] = n.attrs.part;
    if (!n.attrs.perm.empty()) attrs["perm"] = n.attrs.perm;
    if (n.attrs.kernel > 0) attrs["kernel"] = n.attrs.kernel;
    if (!n.attrs.out_dims.empty()) {
      json od = json::array();
      for (const auto& d : n.attrs.out_dims) od.push_back(json::array({d.name, d.extent}));
      attrs["out_dims"] = od;
    }
    jo["attrs"] = std::move(attrs);
    jo["inputs"] = n.inputs;
    jo["output"] = n.output;
    jo["class"] = to_string(n.op_class);
    os.push_back(std::move(jo));
  }
  j["ops"] = std::move(os);
  return j.dump(2);
}

WorkloadGraph workload_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed workload JSON: ") + e.what());
  }
  WorkloadGraph g;
  try {
    g.stage = stage_from_string(j.at("stage").get<std::string>());
    for (const auto& jt : j.at("tensors")) {
      std::vector<Dim> dims;
      for (const auto& jd : jt.at("dims"))
        dims.push_back({jd.at(0).get<std::string>(), jd.at(1).get<std::int64_t>()});
      int id = g.add_tensor(jt.at("name").get<std::string>(), std::move(dims),
                            tensor_kind_from_string(jt.value("kind", "activation")),
                            jt.value("bits", 32));
      if (id != jt.at("id").get<int>())
        throw ConfigError("tensor ids must be dense and ascending");
    }
    for (const auto& jo : j.at("ops")) {
      OpAttrs a;
      const json& attrs = jo.value("attrs", json::object());
      a.axis = attrs.value("axis", -1);
      a.index = attrs.value("index", std::int64_t(-1));
      if (attrs.count("parts")) a.parts = attrs["parts"].get<std::vector<std::int64_t>>();
      a.part = attrs.value("part", -1);
      if (attrs.count("perm")) a.perm = attrs["perm"].get<std::vector<int>>();
      a.kernel = attrs.value("kernel", std::int64_t(0));
      if (attrs.count("out_dims"))
        for (const auto& jd : attrs["out_dims"])
          a.out_dims.push_back({jd.at(0).get<std::string>(), jd.at(1).get<std::int64_t>()});
      int id = g.add_op(op_kind_from_string(jo.at("kind").get<std::string>()),
                        op_class_from_string(jo.at("class").get<std::string>()),
                        jo.at("inputs").get<std::vector<int>>(), jo.at("output").get<int>(),
                        std::move(a));
      if (id != jo.at("id").get<int>())
        throw ConfigError("op ids must be dense and ascending");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed workload JSON: ") + e.what());
  }
  return g;
}

std::string accel_to_json(const AcceleratorConfig& cfg) {
  json j;
  j["pe_count"] = cfg.pe_count;
  j["clock_hz"] = cfg.clock_hz;
  j["onchip_bytes"] = cfg.onchip_bytes;
  j["offchip_gbps"] = cfg.offchip_Bps / 1e9;
  j["macs_per_pe_per_cycle"] = cfg.macs_per_pe_per_cycle;
  json cpo = json::object();
  for (const auto& [k, v] : cfg.cpo) cpo[to_string(k)] = v;
  j["cpo"] = cpo;
  return j.dump(2);
}

AcceleratorConfig accel_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed accelerator JSON: ") + e.what());
  }
  AcceleratorConfig c = marca_preset();
  try {
    if (j.count("pe_count")) c.pe_count = j["pe_count"].get<std::int64_t>();
    if (j.count("clock_hz")) c.clock_hz = j["clock_hz"].get<double>();
    if (j.count("onchip_bytes")) c.onchip_bytes = j["onchip_bytes"].get<std::int64_t>();
    if (j.count("offchip_gbps")) c.offchip_Bps = j["offchip_gbps"].get<double>() * 1e9;
    if (j.count("macs_per_pe_per_cycle"))
      c.macs_per_pe_per_cycle = j["macs_per_pe_per_cycle"].get<double>();
    if (j.count("cpo")) {
      c.cpo.clear();
      for (auto it = j["cpo"].begin(); it != j["cpo"].end(); ++it)
        c.cpo[op_kind_from_string(it.key())] = it.value().get<int>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed accelerator JSON: ") + e.what());
  }
  return c;
}

AcceleratorConfig resolve_accel(const std::string& name_or_path) {
  if (name_or_path == "marca") return marca_preset();
  return accel_from_json(read_file(name_or_path));
}

MambaConfig mamba_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model JSON: ") + e.what());
  }
  MambaConfig c = mamba_2_8b_preset();
  c.d_model = j.value("d_model", c.d_model);
  c.expand = j.value("expand", c.expand);
  c.n_state = j.value("N", c.n_state);
  c.dt_rank = j.value("dt_rank", c.dt_rank);
  c.conv_kernel = j.value("conv_kernel", c.conv_kernel);
  c.n_layers = j.value("n_layers", c.n_layers);
  c.L = j.value("L", c.L);
  if (j.count("stage")) c.stage = stage_from_string(j["stage"].get<std::string>());
  return c;
}

TransformerConfig transformer_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model JSON: ") + e.what());
  }
  TransformerConfig c = opt_2_7b_preset();
  c.d_model = j.value("d_model", c.d_model);
  c.n_heads = j.value("n_heads", c.n_heads);
  c.d_ff = j.value("d_ff", c.d_ff);
  c.n_layers = j.value("n_layers", c.n_layers);
  c.L = j.value("L", c.L);
  c.kv_cache = j.value("kv_cache", c.kv_cache);
  if (j.count("stage")) c.stage = stage_from_string(j["stage"].get<std::string>());
  return c;
}

MambaConfig resolve_mamba(const std::string& name_or_path, std::int64_t L, Stage stage) {
  MambaConfig c;
  if (name_or_path == "mamba-2.8b" || name_or_path == "mamba")
    c = mamba_2_8b_preset();
  else
    c = mamba_from_json(read_file(name_or_path));
  if (L > 0) c.L = L;
  c.stage = stage;
  if (stage == Stage::Decode) c.L = 1;
  return c;
}

TransformerConfig resolve_transformer(const std::string& name_or_path, std::int64_t L,
                                      Stage stage) {
  TransformerConfig c;
  if (name_or_path == "opt-2.7b" || name_or_path == "opt")
    c = opt_2_7b_preset();
  else
    c = transformer_from_json(read_file(name_or_path));
  if (L > 0) c.L = L;
  c.stage = stage;
  return c;
}

std::string report_to_json(const SimReport& r, const AcceleratorConfig& cfg) {
  json j;
  j["total_cycles"] = r.total_cycles;
  j["latency_ms"] = fmt(r.total_cycles / cfg.clock_hz * 1e3, 6);
  json by_class = json::object();
  for (const auto& [c, v] : r.cycles_by_class) by_class[to_string(c)] = v;
  j["cycles_by_class"] = by_class;
  json util = json::object();
  for (const auto& [c, v] : r.utilization_by_class) util[to_string(c)] = fmt(v, 4);
  j["utilization_by_class"] = util;
  j["offchip_bytes_read"] = r.offchip_bytes_read;
  j["offchip_bytes_written"] = r.offchip_bytes_written;
  j["spill_bytes"] = r.spill_bytes;
  j["peak_onchip_bytes"] = r.peak_onchip_bytes;
  j["utilization"] = fmt(r.utilization(), 4);
  json roles = json::object();
  for (const auto& [role, bytes] : r.traffic_by_role) roles[role] = bytes;
  j["offchip_bytes_by_role"] = roles;
  return j.dump(2);
}

std::string timeline_to_csv(const SimReport& r, const WorkloadGraph& g) {
  std::ostringstream os;
  os << "tile,start_cycle,end_cycle,class,offchip_bytes\n";
  for (const auto& e : r.timeline) {
    os << g.tensor(g.op(e.op).output).name;
    if (e.t >= 0) os << "@t" << e.t;
    if (e.d > 0) os << "@d" << e.d;
    os << "," << e.start << "," << e.end << "," << to_string(e.op_class) << ","
       << e.offchip_bytes << "\n";
  }
  return os.str();
}

std::string roofline_to_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream os;
  os << "model,stage,L,class,ops,bytes,oi,perf_gops,latency_s\n";
  for (const auto& r : rows) {
    for (const auto& p : r.profiles) {
      os << r.model << "," << to_string(r.stage) << "," << r.L << ","
         << to_string(p.op_class) << "," << p.ops << "," << p.dram_bytes << ","
         << fmt(p.oi, 6) << "," << fmt(p.perf_ops_per_s / 1e9, 3) << ","
         << fmt_sci(p.latency_s) << "\n";
    }
    os << r.model << "," << to_string(r.stage) << "," << r.L << ",total,,,,,"
       << fmt_sci(r.latency_s) << "\n";
  }
  return os.str();
}

std::string memory_sweep_to_csv(const std::vector<SweepPoint>& points,
                                const AcceleratorConfig& cfg) {
  std::ostringstream os;
  os << "capacity_bytes,capacity_mib,n_splits,total_cycles,latency_ms\n";
  for (const auto& p : points) {
    os << p.capacity << "," << fmt(p.capacity / 1048576.0, 4) << "," << p.d_splits << ","
       << p.total_cycles << "," << fmt(p.total_cycles / cfg.clock_hz * 1e3, 6) << "\n";
  }
  return os.str();
}

std::string dse_to_csv(const DseResult& r, const AcceleratorConfig& anchor) {
  std::ostringstream os;
  os << "area_mm2,mem_fraction,pe_count,onchip_MiB,bw_GBps,n_splits,cycles,latency_ms,"
        "speedup,status\n";
  for (const auto& p : r.grid) {
    os << fmt(p.area_mm2, 3) << "," << fmt(p.mem_frac, 3) << "," << p.pe_count << ","
       << fmt(p.onchip_bytes / 1048576.0, 4) << "," << fmt(p.bw_Bps / 1e9, 3) << ","
       << p.n_splits << "," << p.cycles << ","
       << (p.cycles >= 0 ? fmt(p.cycles / anchor.clock_hz * 1e3, 6) : std::string("")) << ","
       << (p.cycles > 0 ? fmt(p.speedup, 4) : std::string("")) << "," << p.status << "\n";
  }
  return os.str();
}

std::string dse_to_contour(const DseResult& r) {
  std::ostringstream os;
  os << "# mem_fraction  area_mm2  latency_cycles\n";
  double cur = -1;
  for (const auto& p : r.grid) {
    if (cur >= 0 && p.area_frac != cur) os << "\n";
    cur = p.area_frac;
    os << fmt(p.mem_frac, 3) << " " << fmt(p.area_mm2, 3) << " "
       << (p.cycles >= 0 ? std::to_string(p.cycles) : std::string("nan")) << "\n";
  }
  return os.str();
}

std::string schemes_to_text() {
  std::ostringstream os;
  os << "scheme,abbrev,local_tensors,tiles_per_fused_layer\n";
  for (const auto& row : scheme_table())
    os << row.full_name << "," << row.abbrev << ",\"" << row.locals << "\","
       << row.tiles_per_layer << "\n";
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open file: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write file: " + path);
  f << content;
}

}  // namespace ssmfusim
