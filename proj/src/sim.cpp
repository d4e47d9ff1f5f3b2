#include "ssmfusim/sim.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <queue>

namespace ssmfusim {

double SimReport::utilization() const {
  std::int64_t comp = 0;
  for (const auto& [c, v] : compute_cycles_by_class) comp += v;
  return total_cycles > 0 ? static_cast<double>(comp) / total_cycles : 0.0;
}

std::int64_t compute_cycles_for(std::int64_t scalar_ops, std::int64_t extent,
                                OpKind kind, const AcceleratorConfig& cfg) {
  if (scalar_ops <= 0) return 0;
  double lanes = static_cast<double>(std::min<std::int64_t>(cfg.pe_count, std::max<std::int64_t>(extent, 1)));
  double rate = lanes * cfg.macs_per_pe_per_cycle;
  std::int64_t cyc = static_cast<std::int64_t>(std::ceil(scalar_ops / rate));
  return cyc * cfg.cpo_for(kind);
}

std::int64_t tile_compute_cycles(const OpNode& node, const WorkloadGraph& g,
                                 const AcceleratorConfig& cfg) {
  return compute_cycles_for(op_count(node, g), parallel_extent(node, g), node.kind, cfg);
}

namespace {

// Scalar ops of one output-region tile of `node`.
std::int64_t region_ops(const OpNode& node, const WorkloadGraph& g, const Region& out_region) {
  if (is_data_movement(node.kind)) return 0;
  std::int64_t e = out_region.volume();
  switch (node.kind) {
    case OpKind::MatMul: {
      std::int64_t k = g.tensor(node.inputs[0]).dims[1].extent;
      return 2 * e * k;
    }
    case OpKind::OuterProduct:
    case OpKind::Einsum: {
      // Contracted labels span fully per output element.
      std::int64_t contracted = 1;
      const TensorSpec& out = g.tensor(node.output);
      for (int pos : {0, 1}) {
        for (const auto& d : g.tensor(node.inputs[pos]).dims)
          if (!out.dim_index(d.name)) contracted *= d.extent;
      }
      return 2 * e * contracted;
    }
    case OpKind::EwAdd:
    case OpKind::EwMul:
    case OpKind::Exp:
    case OpKind::SiLU:
    case OpKind::Sigmoid:
    case OpKind::SoftPlus:
      return e;
    case OpKind::ReduceSum: {
      std::int64_t ax = g.tensor(node.inputs[0]).dims[node.attrs.axis].extent;
      return e * ax - e;
    }
    case OpKind::Softmax:
      return 5 * e;
    case OpKind::RMSNorm:
      return 4 * e;
    case OpKind::Conv1dDepthwise:
      return 2 * e * node.attrs.kernel;
    default:
      return 0;
  }
}

struct Blob {
  int tensor = -1;
  Region region;
  std::int64_t bytes = 0;
  bool dirty = false;   // on-chip copy not (yet) materialized off-chip
  bool pinned = false;  // layer-pinned weight
  bool state = false;   // recurrent state, never transferred
  std::int64_t next_use = -1;  // next tile index reading this blob, -1 = none
  std::uint64_t generation = 0;
  bool alive = false;
};

struct TensorUse {
  std::int64_t tile_idx;
  Region region;
};

bool region_contains(const Region& a, const Region& b) {
  if (a.span.size() != b.span.size()) return false;
  for (size_t i = 0; i < a.span.size(); ++i) {
    if (b.span[i].first < a.span[i].first) return false;
    if (b.span[i].first + b.span[i].second > a.span[i].first + a.span[i].second) return false;
  }
  return true;
}

bool region_intersects(const Region& a, const Region& b) {
  for (size_t i = 0; i < a.span.size(); ++i) {
    std::int64_t lo = std::max(a.span[i].first, b.span[i].first);
    std::int64_t hi = std::min(a.span[i].first + a.span[i].second,
                               b.span[i].first + b.span[i].second);
    if (lo >= hi) return false;
  }
  return true;
}

struct Memory {
  std::int64_t capacity = 0;
  std::int64_t retain_limit = 0;
  std::int64_t resident = 0;
  std::int64_t peak = 0;
  std::vector<Blob> blobs;
  std::map<int, std::vector<int>> by_tensor;  // tensor id -> blob indices
  // Max-heap on next_use with lazy invalidation.
  std::priority_queue<std::tuple<std::int64_t, int, std::uint64_t>> evict_heap;
  std::uint64_t gen_counter = 0;

  int find_containing(int tensor, const Region& r) const {
    auto it = by_tensor.find(tensor);
    if (it == by_tensor.end()) return -1;
    for (int b : it->second)
      if (blobs[b].alive && region_contains(blobs[b].region, r)) return b;
    return -1;
  }

  int add_blob(Blob b) {
    b.alive = true;
    b.generation = ++gen_counter;
    int idx;
    // Reuse a dead slot when available.
    if (!free_slots.empty()) {
      idx = free_slots.back();
      free_slots.pop_back();
      blobs[idx] = std::move(b);
    } else {
      idx = static_cast<int>(blobs.size());
      blobs.push_back(std::move(b));
    }
    by_tensor[blobs[idx].tensor].push_back(idx);
    resident += blobs[idx].bytes;
    peak = std::max(peak, resident);
    if (blobs[idx].next_use >= 0 && !blobs[idx].pinned && !blobs[idx].state)
      evict_heap.push({blobs[idx].next_use, idx, blobs[idx].generation});
    return idx;
  }

  void drop(int idx) {
    Blob& b = blobs[idx];
    if (!b.alive) return;
    b.alive = false;
    resident -= b.bytes;
    auto& v = by_tensor[b.tensor];
    v.erase(std::remove(v.begin(), v.end(), idx), v.end());
    free_slots.push_back(idx);
  }

  std::vector<int> free_slots;
};

std::string role_of(const std::string& name) {
  std::string s = name;
  auto dot = s.find('.');
  if (dot != std::string::npos && s.compare(0, 3, "blk") == 0) s = s.substr(dot + 1);
  // Fold per-timestep suffixes: "exp_dA.t13" -> "exp_dA".
  auto t = s.rfind(".t");
  if (t != std::string::npos) {
    bool digits = t + 2 < s.size();
    for (size_t i = t + 2; i < s.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) digits = false;
    if (digits) s = s.substr(0, t);
  }
  return s;
}

}  // namespace

SimReport simulate(const Schedule& schedule, const MambaModel& model,
                   const AcceleratorConfig& cfg, const SimOptions& opts) {
  const WorkloadGraph& g = model.graph;
  if (cfg.pe_count <= 0) throw InfeasibleError("accelerator has no PEs");
  if (cfg.offchip_Bps <= 0) throw ConfigError("off-chip bandwidth must be positive");

  const double bpc = cfg.bytes_per_cycle();
  const std::int64_t n_tiles = static_cast<std::int64_t>(schedule.tiles.size());

  // Output region of a tile.
  auto out_region_of = [&](const SimTile& tile) {
    const TensorSpec& out = g.tensor(g.op(tile.op).output);
    Region r = Region::full(out);
    for (size_t i = 0; i < out.dims.size(); ++i) {
      if (out.dims[i].name == "L" && tile.t >= 0) r.span[i] = {tile.t, 1};
      if (out.dims[i].name == "D" && tile.n_d > 1)
        r.span[i] = tile_range(out.dims[i].extent, tile.n_d, tile.d);
    }
    return r;
  };

  // Physical reads of a tile.
  struct TileRead {
    int tensor;
    Region region;
    std::int64_t bytes;
  };
  auto reads_of = [&](const SimTile& tile) {
    std::vector<TileRead> out;
    const OpNode& n = g.op(tile.op);
    Region oreg = out_region_of(tile);
    for (size_t pos = 0; pos < n.inputs.size(); ++pos) {
      Region in_r = input_region_for(n, g, static_cast<int>(pos), oreg);
      for (const auto& pr : trace_physical_reads(g, n.inputs[pos], in_r)) {
        const TensorSpec& t = g.tensor(pr.tensor_id);
        out.push_back({pr.tensor_id, pr.region, pr.region.volume() * t.element_bits / 8});
      }
    }
    return out;
  };

  // Use lists per physical tensor (tile index + read region).
  std::map<int, std::vector<TensorUse>> uses;
  {
    for (std::int64_t i = 0; i < n_tiles; ++i)
      for (const auto& r : reads_of(schedule.tiles[i])) uses[r.tensor].push_back({i, r.region});
  }
  auto group_of_tile = [&](std::int64_t idx) {
    return idx >= 0 && idx < n_tiles ? schedule.tiles[idx].group : -1;
  };

  // Locality classification.
  auto is_local_tensor = [&](int tensor_id) {
    const std::string role = role_of(g.tensor(tensor_id).name);
    if (schedule.scheme.is_local(role)) return true;
    return false;
  };

  // Pin windows per tensor, non-overlapping and in schedule order.
  std::map<int, std::int64_t> pin_until;
  for (const auto& p : schedule.pins)
    for (int t : p.tensors)
      pin_until[t] = static_cast<std::int64_t>(p.last_tile);
  auto pinned_at = [&](int tensor_id, std::int64_t tile_idx) {
    auto it = pin_until.find(tensor_id);
    return it != pin_until.end() && it->second >= tile_idx;
  };

  Memory mem;
  mem.capacity = cfg.onchip_bytes;
  mem.retain_limit = cfg.onchip_bytes / std::max(1, opts.retention_divisor);

  SimReport rep;
  auto traffic = [&](int tensor_id, std::int64_t bytes) {
    rep.traffic_by_role[role_of(g.tensor(tensor_id).name)] += bytes;
  };

  std::int64_t cur_tile = -1;
  std::uint64_t tile_stamp = 0;
  std::vector<std::uint64_t> blob_stamp;  // parallel to mem.blobs

  auto stamp_blob = [&](int idx) {
    if (blob_stamp.size() < mem.blobs.size()) blob_stamp.resize(mem.blobs.size(), 0);
    blob_stamp[idx] = tile_stamp;
  };
  auto blob_in_use = [&](int idx) {
    return idx < static_cast<int>(blob_stamp.size()) && blob_stamp[idx] == tile_stamp;
  };

  // Find a blob's next reading tile after `after` (use lists are sorted).
  auto refresh_next_use = [&](int idx, std::int64_t after) {
    Blob& b = mem.blobs[idx];
    b.next_use = -1;
    auto it = uses.find(b.tensor);
    if (it == uses.end()) return;
    const auto& ul = it->second;
    auto lo = std::lower_bound(ul.begin(), ul.end(), after + 1,
                               [](const TensorUse& u, std::int64_t v) { return u.tile_idx < v; });
    for (; lo != ul.end(); ++lo) {
      if (region_intersects(lo->region, b.region)) {
        b.next_use = lo->tile_idx;
        break;
      }
    }
    if (b.next_use >= 0 && !b.pinned && !b.state)
      mem.evict_heap.push({b.next_use, idx, b.generation});
  };

  std::int64_t pending_transfer = 0;  // bytes, current tile
  auto evict_for = [&](std::int64_t need) {
    if (mem.resident + need <= mem.capacity) return;
    std::vector<std::tuple<std::int64_t, int, std::uint64_t>> skipped;
    while (mem.resident + need > mem.capacity) {
      int victim = -1;
      while (!mem.evict_heap.empty()) {
        auto top = mem.evict_heap.top();
        auto [nu, idx, gen] = top;
        const Blob& b = mem.blobs[idx];
        mem.evict_heap.pop();
        if (!b.alive || b.generation != gen || b.next_use != nu) continue;  // stale
        if (b.pinned || b.state || blob_in_use(idx)) {
          skipped.push_back(top);
          continue;
        }
        victim = idx;
        break;
      }
      if (victim < 0) {
        for (const auto& s : skipped) mem.evict_heap.push(s);
        throw InfeasibleError("tile working set exceeds on-chip capacity");
      }
      Blob& b = mem.blobs[victim];
      if (b.dirty && b.next_use >= 0) {
        pending_transfer += b.bytes;
        rep.offchip_bytes_written += b.bytes;
        rep.spill_bytes += b.bytes;
        traffic(b.tensor, b.bytes);
      }
      mem.drop(victim);
    }
    for (const auto& s : skipped) mem.evict_heap.push(s);
  };

  // Unpin and drop layer-pinned weights once their window closes.
  std::size_t next_pin = 0;
  auto expire_pins = [&](std::int64_t tile_idx) {
    while (next_pin < schedule.pins.size() &&
           static_cast<std::int64_t>(schedule.pins[next_pin].last_tile) < tile_idx) {
      for (int t : schedule.pins[next_pin].tensors) {
        auto bt = mem.by_tensor.find(t);
        if (bt != mem.by_tensor.end()) {
          for (int b : std::vector<int>(bt->second)) {
            mem.blobs[b].pinned = false;
            if (mem.blobs[b].alive && mem.blobs[b].next_use < 0)
              mem.drop(b);
            else if (mem.blobs[b].alive)
              mem.evict_heap.push({mem.blobs[b].next_use, b, mem.blobs[b].generation});
          }
        }
        pin_until.erase(t);
      }
      ++next_pin;
    }
  };

  // Group accumulation.
  std::int64_t cur_group = -1;
  std::int64_t group_comp = 0, group_tr = 0;
  std::vector<TimelineEntry> group_entries;
  double clock_pos = 0;

  std::map<OpClass, double> class_cycles;
  auto flush_group = [&]() {
    if (cur_group < 0) return;
    std::int64_t sum_max = 0;
    for (const auto& e : group_entries)
      sum_max += std::max(e.compute_cycles, e.transfer_cycles);
    std::int64_t latency = std::max(group_comp, group_tr);
    rep.total_cycles += latency;
    double scale = sum_max > 0 ? static_cast<double>(latency) / sum_max : 0.0;
    for (auto& e : group_entries) {
      double share = std::max(e.compute_cycles, e.transfer_cycles) * scale;
      class_cycles[e.op_class] += share;
      rep.compute_cycles_by_class[e.op_class] += e.compute_cycles;
      if (opts.keep_timeline) {
        e.start = static_cast<std::int64_t>(clock_pos);
        clock_pos += share;
        e.end = static_cast<std::int64_t>(clock_pos);
        rep.timeline.push_back(e);
      }
    }
    if (!opts.keep_timeline) clock_pos += latency;
    group_entries.clear();
    group_comp = group_tr = 0;
    cur_group = -1;
  };

  for (std::int64_t i = 0; i < n_tiles; ++i) {
    const SimTile& tile = schedule.tiles[i];
    const OpNode& node = g.op(tile.op);
    cur_tile = i;
    ++tile_stamp;
    if (tile.group != cur_group) {
      flush_group();
      cur_group = tile.group;
    }
    expire_pins(i);
    pending_transfer = 0;

    // 1. Inputs.
    for (const auto& rd : reads_of(tile)) {
      const TensorSpec& t = g.tensor(rd.tensor);
      if (t.kind == TensorKind::State) {
        // The recurrent state lives on-chip; materialize h_0 on first touch.
        int b = mem.find_containing(rd.tensor, rd.region);
        if (b < 0) {
          Blob nb;
          nb.tensor = rd.tensor;
          nb.region = rd.region;
          nb.bytes = rd.bytes;
          nb.state = true;
          evict_for(rd.bytes);
          b = mem.add_blob(std::move(nb));
          refresh_next_use(b, i - 1);
        }
        stamp_blob(b);
        continue;
      }
      int b = mem.find_containing(rd.tensor, rd.region);
      if (b >= 0) {
        stamp_blob(b);
        refresh_next_use(b, i);
        if (mem.blobs[b].next_use < 0 && !mem.blobs[b].pinned) mem.drop(b);
        continue;
      }
      // Fetch from off-chip.
      pending_transfer += rd.bytes;
      rep.offchip_bytes_read += rd.bytes;
      traffic(rd.tensor, rd.bytes);
      bool retain = rd.bytes <= mem.retain_limit || pinned_at(rd.tensor, i);
      if (retain) {
        Blob nb;
        nb.tensor = rd.tensor;
        nb.region = rd.region;
        nb.bytes = rd.bytes;
        nb.dirty = false;
        nb.pinned = pinned_at(rd.tensor, i);
        evict_for(rd.bytes);
        int idx = mem.add_blob(std::move(nb));
        stamp_blob(idx);
        refresh_next_use(idx, i);
        if (mem.blobs[idx].next_use < 0 && !mem.blobs[idx].pinned) mem.drop(idx);
      }
    }

    // 2. Compute.
    Region oreg = out_region_of(tile);
    std::int64_t ops = region_ops(node, g, oreg);
    std::int64_t comp = compute_cycles_for(ops, oreg.volume(), node.kind, cfg);

    // 3. Output placement.
    const TensorSpec& out_t = g.tensor(node.output);
    std::int64_t out_bytes = oreg.volume() * out_t.element_bits / 8;
    bool graph_output = g.consumers_of(node.output).empty();
    bool local = is_local_tensor(node.output);
    bool transient = schedule.transient_tensors.count(node.output) > 0;
    if (transient) {
      // Working intermediate: on-chip only when consumed inside this group.
      const auto& ul = uses[node.output];
      for (const auto& u : ul)
        if (group_of_tile(u.tile_idx) != tile.group) transient = false;
    }

    if (out_t.kind == TensorKind::State) {
      evict_for(out_bytes);
      Blob nb;
      nb.tensor = node.output;
      nb.region = oreg;
      nb.bytes = out_bytes;
      nb.state = true;
      int idx = mem.add_blob(std::move(nb));
      stamp_blob(idx);
      refresh_next_use(idx, i);
      if (mem.blobs[idx].next_use < 0) mem.drop(idx);
    } else if (local || transient) {
      evict_for(out_bytes);
      Blob nb;
      nb.tensor = node.output;
      nb.region = oreg;
      nb.bytes = out_bytes;
      nb.dirty = true;  // no off-chip copy exists
      int idx = mem.add_blob(std::move(nb));
      stamp_blob(idx);
      refresh_next_use(idx, i);
      if (mem.blobs[idx].next_use < 0) mem.drop(idx);
      if (graph_output) {
        pending_transfer += out_bytes;
        rep.offchip_bytes_written += out_bytes;
        traffic(node.output, out_bytes);
      }
    } else {
      bool has_future_reader = uses.count(node.output) && !uses[node.output].empty();
      bool resident_copy = out_bytes <= mem.retain_limit && has_future_reader;
      bool write_now = opts.write_through || graph_output || !resident_copy;
      if (write_now) {
        pending_transfer += out_bytes;
        rep.offchip_bytes_written += out_bytes;
        traffic(node.output, out_bytes);
      }
      if (resident_copy) {
        evict_for(out_bytes);
        Blob nb;
        nb.tensor = node.output;
        nb.region = oreg;
        nb.bytes = out_bytes;
        nb.dirty = !write_now;
        int idx = mem.add_blob(std::move(nb));
        stamp_blob(idx);
        refresh_next_use(idx, i);
        if (mem.blobs[idx].next_use < 0) mem.drop(idx);
      }
    }

    // 4. Account the tile.
    std::int64_t tr = static_cast<std::int64_t>(std::ceil(pending_transfer / bpc));
    group_comp += comp;
    group_tr += tr;
    TimelineEntry e;
    e.op = tile.op;
    e.t = tile.t;
    e.d = tile.d;
    e.op_class = node.op_class;
    e.compute_cycles = comp;
    e.transfer_cycles = tr;
    e.offchip_bytes = pending_transfer;
    group_entries.push_back(e);
  }
  flush_group();
  (void)cur_tile;

  for (const auto& [c, v] : class_cycles)
    rep.cycles_by_class[c] = static_cast<std::int64_t>(std::llround(v));
  for (const auto& [c, v] : rep.compute_cycles_by_class) {
    std::int64_t lat = rep.cycles_by_class.count(c) ? rep.cycles_by_class[c] : 0;
    rep.utilization_by_class[c] = lat > 0 ? std::min(1.0, static_cast<double>(v) / lat) : 0.0;
  }
  rep.peak_onchip_bytes = mem.peak;
  return rep;
}

SimReport simulate_scheme(const MambaModel& model, SchemeName name,
                          const AcceleratorConfig& cfg, const SimOptions& opts) {
  FusionScheme s = scheme(name, model.cfg, cfg.onchip_bytes);
  Schedule sched = generate_schedule(model, s);
  return simulate(sched, model, cfg, opts);
}

std::vector<SweepPoint> memory_sweep(const MambaModel& model, SchemeName name,
                                     const AcceleratorConfig& cfg,
                                     const std::vector<std::int64_t>& capacities,
                                     const SimOptions& opts) {
  std::vector<SweepPoint> out;
  for (std::int64_t cap : capacities) {
    AcceleratorConfig c = cfg;
    c.onchip_bytes = cap;
    FusionScheme s = scheme(name, model.cfg, cap);
    Schedule sched = generate_schedule(model, s);
    SimReport r = simulate(sched, model, c, opts);
    out.push_back({cap, r.total_cycles, s.d_split_factor});
  }
  return out;
}

}  // namespace ssmfusim
