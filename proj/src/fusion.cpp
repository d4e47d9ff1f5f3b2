#include "ssmfusim/fusion.hpp"

#include <algorithm>
#include <array>
#include <map>

namespace ssmfusim {

const char* to_string(SchemeName s) {
  switch (s) {
    case SchemeName::UF: return "UF";
    case SchemeName::A: return "A";
    case SchemeName::B: return "B";
    case SchemeName::A_B: return "A-B";
    case SchemeName::AS: return "AS";
    case SchemeName::BS: return "BS";
    case SchemeName::AS_B: return "AS-B";
    case SchemeName::BS_A: return "BS-A";
    case SchemeName::All: return "All";
    case SchemeName::MA_All: return "MA-All";
  }
  return "?";
}

SchemeName scheme_from_string(const std::string& s) {
  static const std::array<std::pair<const char*, SchemeName>, 10> t{{
      {"uf", SchemeName::UF}, {"a", SchemeName::A}, {"b", SchemeName::B},
      {"a-b", SchemeName::A_B}, {"as", SchemeName::AS}, {"bs", SchemeName::BS},
      {"as-b", SchemeName::AS_B}, {"bs-a", SchemeName::BS_A},
      {"all", SchemeName::All}, {"ma-all", SchemeName::MA_All},
  }};
  std::string k;
  for (char c : s) k += static_cast<char>(std::tolower(c));
  for (const auto& [name, v] : t)
    if (k == name) return v;
  throw ConfigError("unknown fusion scheme: " + s);
}

std::int64_t required_bytes(std::int64_t D, std::int64_t N, int element_bits) {
  return (5 * D * N + D) * element_bits / 8;
}

int compute_d_splits(std::int64_t D, std::int64_t N, int element_bits,
                     std::int64_t memory_bytes) {
  if (memory_bytes <= 0) throw ConfigError("memory capacity must be positive");
  std::int64_t need = required_bytes(D, N, element_bits);
  std::int64_t n = (need + memory_bytes - 1) / memory_bytes;
  if (n < 1) n = 1;
  // Ragged last slices may still overflow; bump until one slice fits.
  for (; n <= D; ++n) {
    std::int64_t slice = (D + n - 1) / n;
    if (required_bytes(slice, N, element_bits) <= memory_bytes) return static_cast<int>(n);
  }
  throw InfeasibleError("no D split fits the on-chip capacity");
}

FusionScheme scheme(SchemeName name, const MambaConfig& cfg, std::int64_t memory_bytes) {
  FusionScheme s;
  s.name = name;
  s.l_split = name != SchemeName::UF;
  switch (name) {
    case SchemeName::UF:
      s.l_split = false;
      break;
    case SchemeName::A:
      s.local_tensors = {"dA"};
      break;
    case SchemeName::B:
      s.local_tensors = {"dB"};
      break;
    case SchemeName::A_B:
      s.local_tensors = {"dA", "dB"};
      break;
    case SchemeName::AS:
      s.local_tensors = {"dA", "exp_dA", "h"};
      s.h_double = true;
      break;
    case SchemeName::BS:
      s.local_tensors = {"dB", "dBx", "h"};
      s.h_double = true;
      break;
    case SchemeName::AS_B:
      s.local_tensors = {"dA", "exp_dA", "h", "dB"};
      s.h_double = true;
      break;
    case SchemeName::BS_A:
      s.local_tensors = {"dB", "dBx", "h", "dA"};
      s.h_double = true;
      break;
    case SchemeName::All:
    case SchemeName::MA_All:
      s.local_tensors = {"dA", "exp_dA", "dB", "dBx", "h"};
      s.h_double = true;
      if (name == SchemeName::MA_All) {
        if (memory_bytes <= 0) throw ConfigError("MA-All needs a memory capacity");
        s.d_split_factor = compute_d_splits(cfg.d_inner(), cfg.n_state, 32, memory_bytes);
      }
      break;
  }
  return s;
}

std::vector<SchemeRow> scheme_table() {
  return {
      {"Unfused", "UF", "None", "None"},
      {"A-side", "A", "dA", "L"},
      {"B-side", "B", "dB", "L"},
      {"AB-sides", "A-B", "dA, dB", "L"},
      {"A-state", "AS", "dA, exp_dA, h (x2)", "L"},
      {"B-state", "BS", "dB, dBx, h (x2)", "L"},
      {"A-state,B", "AS-B", "dA, exp_dA, h (x2), dB", "L"},
      {"B-state,A", "BS-A", "dB, dBx, h (x2), dA", "L"},
      {"Fuse-All", "All", "dA, exp_dA, dB, dBx, h (x2)", "L"},
      {"Mem-Aware", "MA-All", "dA, exp_dA, dB, dBx, h (x2)", "n L"},
  };
}

namespace {

struct FusedSet {
  std::vector<int> bulk;            // L-tiled bulk ops, dataflow order
  bool chain = false;               // per-t h chain runs inside the groups
  bool y_tail = false;              // Dx / y fused per timestep
};

FusedSet fused_ops_for(const FusionScheme& s, const SsmBlockInfo& b) {
  FusedSet f;
  switch (s.name) {
    case SchemeName::UF:
      break;
    case SchemeName::A:
      f.bulk = {b.op_dA, b.op_exp};
      break;
    case SchemeName::B:
      f.bulk = {b.op_dB, b.op_dbx};
      break;
    case SchemeName::A_B:
      f.bulk = {b.op_dA, b.op_exp, b.op_dB, b.op_dbx};
      break;
    case SchemeName::AS:
      f.bulk = {b.op_dA, b.op_exp};
      f.chain = true;
      break;
    case SchemeName::BS:
      f.bulk = {b.op_dB, b.op_dbx};
      f.chain = true;
      break;
    case SchemeName::AS_B:
      // ΔB is kept local as well; its consumer ΔBx streams per timestep.
      f.bulk = {b.op_dA, b.op_exp, b.op_dB, b.op_dbx};
      f.chain = true;
      break;
    case SchemeName::BS_A:
      f.bulk = {b.op_dA, b.op_exp, b.op_dB, b.op_dbx};
      f.chain = true;
      break;
    case SchemeName::All:
    case SchemeName::MA_All:
      f.bulk = {b.op_dA, b.op_exp, b.op_dB, b.op_dbx};
      f.chain = true;
      f.y_tail = true;
      break;
  }
  return f;
}

}  // namespace

Schedule generate_schedule(const MambaModel& model, const FusionScheme& scheme) {
  const WorkloadGraph& g = model.graph;
  Schedule sched;
  sched.scheme = scheme;
  const int n_d = scheme.d_split_factor;

  // Working intermediates of the decomposed h update never leave the chip
  // when produced and consumed inside one group.
  for (const auto& b : model.blocks) {
    for (int t : b.t_hmul) sched.transient_tensors.insert(t);
    for (int t : b.t_ch) sched.transient_tensors.insert(t);
  }

  std::map<int, const SsmBlockInfo*> block_of_op;  // fused op -> block
  std::map<int, FusedSet> fused_of_layer;
  for (const auto& b : model.blocks) {
    FusedSet f = fused_ops_for(scheme, b);
    for (int op : f.bulk) block_of_op[op] = &b;
    if (f.chain) {
      for (auto v : {&b.op_hmul, &b.op_hadd, &b.op_ch, &b.op_ysum})
        for (int op : *v) block_of_op[op] = &b;
    }
    if (f.y_tail) {
      block_of_op[b.op_dx] = &b;
      block_of_op[b.op_y] = &b;
    }
    fused_of_layer[b.layer] = std::move(f);
  }

  // Emission trigger per layer: the last external producer of the fused set.
  auto order = topo_order(g);
  std::map<int, std::size_t> pos;
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
  std::map<std::size_t, std::vector<int>> emit_after;  // topo pos -> layers
  for (const auto& b : model.blocks) {
    const FusedSet& f = fused_of_layer[b.layer];
    if (f.bulk.empty() && !f.chain) continue;
    std::size_t trigger = 0;
    auto consider = [&](int op_id) {
      const OpNode& n = g.op(op_id);
      for (int in : n.inputs) {
        for (const auto& pr : trace_physical_reads(g, in, Region::full(g.tensor(in)))) {
          int p = g.producer_of(pr.tensor_id);
          if (p >= 0 && !block_of_op.count(p)) trigger = std::max(trigger, pos.at(p));
        }
      }
    };
    for (int op : f.bulk) consider(op);
    if (f.chain)
      for (auto v : {&b.op_hmul, &b.op_hadd, &b.op_ch, &b.op_ysum})
        for (int op : *v) consider(op);
    if (f.y_tail) {
      consider(b.op_dx);
      consider(b.op_y);
    }
    emit_after[trigger].push_back(b.layer);
  }

  std::int64_t group = 0;
  auto emit_layer_groups = [&](const SsmBlockInfo& b) {
    const FusedSet& f = fused_of_layer[b.layer];
    Schedule::LayerPins pins;
    pins.layer = b.layer;
    pins.tensors = {b.t_A};
    if (f.y_tail) pins.tensors.push_back(b.t_Dw);
    pins.first_tile = sched.tiles.size();

    for (int d = 0; d < n_d; ++d) {
      for (std::int64_t t = 0; t < b.L; ++t) {
        std::int64_t gid = group++;
        auto emit = [&](int op) {
          sched.tiles.push_back({op, t, d, n_d, gid, b.layer});
        };
        for (int op : f.bulk) emit(op);
        if (f.chain) {
          emit(b.op_hmul[t]);
          emit(b.op_hadd[t]);
          emit(b.op_ch[t]);
          emit(b.op_ysum[t]);
        }
        if (f.y_tail) {
          emit(b.op_dx);
          emit(b.op_y);
        }
      }
    }
    pins.last_tile = sched.tiles.size() - 1;
    if (!sched.tiles.empty() && pins.last_tile >= pins.first_tile)
      sched.pins.push_back(std::move(pins));

    // Tile accounting for Table-1 conformance.
    auto record = [&](int op_id) {
      const OpNode& n = g.op(op_id);
      DimSplits sp;
      if (g.tensor(n.output).dim_index("L")) sp["L"] = static_cast<int>(b.L);
      if (n_d > 1 && g.tensor(n.output).dim_index("D")) sp["D"] = n_d;
      sched.tiling[n.output] = sp;
    };
    for (int op : f.bulk) record(op);
  };

  for (std::size_t i = 0; i < order.size(); ++i) {
    int op_id = order[i];
    const OpNode& n = g.op(op_id);
    bool fused = block_of_op.count(op_id) > 0;
    if (!fused && !is_data_movement(n.kind))
      sched.tiles.push_back({op_id, -1, 0, 1, group++, -1});
    auto it = emit_after.find(i);
    if (it != emit_after.end()) {
      for (int layer : it->second) {
        auto bi = std::find_if(model.blocks.begin(), model.blocks.end(),
                               [&](const SsmBlockInfo& b) { return b.layer == layer; });
        emit_layer_groups(*bi);
      }
    }
  }
  return sched;
}

std::map<std::string, std::int64_t> fused_tile_counts(const MambaModel& model,
                                                      const Schedule& s) {
  std::map<int, std::int64_t> per_op;
  for (const auto& t : s.tiles) per_op[t.op]++;
  std::map<std::string, std::int64_t> out;
  auto role_of = [&](int tensor_id) -> std::string {
    const std::string& n = model.graph.tensor(tensor_id).name;
    auto dot = n.find('.');
    return dot == std::string::npos ? n : n.substr(dot + 1);
  };
  for (const auto& b : model.blocks) {
    for (int op : {b.op_dA, b.op_exp, b.op_dB, b.op_dbx}) {
      if (!per_op.count(op)) continue;
      std::string role = role_of(model.graph.op(op).output);
      auto it = out.find(role);
      if (it == out.end())
        out[role] = per_op[op];
      else
        it->second = std::max(it->second, per_op[op]);
    }
    // h: per-timestep updates, one tile per (d, t).
    std::int64_t h_tiles = 0;
    for (int op : b.op_hadd) h_tiles += per_op.count(op) ? per_op[op] : 0;
    if (h_tiles) {
      auto it = out.find("h");
      if (it == out.end())
        out["h"] = h_tiles;
      else
        it->second = std::max(it->second, h_tiles);
    }
  }
  return out;
}

}  // namespace ssmfusim
