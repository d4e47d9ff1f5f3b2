#include "ssmfusim/tracker.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <sstream>

namespace ssmfusim {

namespace {

// Dense-tracking guard: propagation at full model dims is only viable when
// the large inner dims stay collapsed.
constexpr std::int64_t kMaxTrackedCells = std::int64_t(1) << 22;

CellSet merge(const CellSet& a, const CellSet& b) {
  CellSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

void merge_into(CellSet& a, const CellSet& b) {
  if (b.empty()) return;
  if (a.empty()) {
    a = b;
    return;
  }
  a = merge(a, b);
}

std::int64_t volume_of(const std::vector<Dim>& dims, const std::vector<bool>& collapsed) {
  std::int64_t v = 1;
  for (size_t i = 0; i < dims.size(); ++i)
    if (!collapsed[i]) v *= dims[i].extent;
  return v;
}

}  // namespace

std::pair<std::int64_t, std::int64_t> tile_range(std::int64_t extent, int splits, int idx) {
  std::int64_t step = (extent + splits - 1) / splits;
  std::int64_t lo = std::min<std::int64_t>(extent, step * idx);
  std::int64_t hi = std::min<std::int64_t>(extent, lo + step);
  return {lo, hi - lo};
}

int tile_index_of(std::int64_t element, std::int64_t extent, int splits) {
  std::int64_t step = (extent + splits - 1) / splits;
  return static_cast<int>(element / step);
}

std::int64_t ProducerMap::uncollapsed_volume() const {
  return volume_of(dims, collapsed);
}

const CellSet& ProducerMap::at(const std::vector<std::int64_t>& idx) const {
  std::int64_t flat = 0;
  for (size_t i = 0; i < dims.size(); ++i) {
    if (collapsed[i]) continue;
    flat = flat * dims[i].extent + idx[i];
  }
  return cells[flat];
}

void ProducerMap::expand_dim(int dim_pos) {
  if (!collapsed[dim_pos]) return;
  // Replicate cells along the newly dense dim, keeping row-major order.
  std::int64_t inner = 1;
  for (size_t i = dim_pos + 1; i < dims.size(); ++i)
    if (!collapsed[i]) inner *= dims[i].extent;
  std::int64_t outer = uncollapsed_volume() / inner;
  std::int64_t e = dims[dim_pos].extent;
  if (outer * e * inner > kMaxTrackedCells)
    throw ConfigError("dependency tracking would exceed the cell guard; collapse large dims");
  std::vector<CellSet> out;
  out.reserve(outer * e * inner);
  for (std::int64_t o = 0; o < outer; ++o)
    for (std::int64_t k = 0; k < e; ++k)
      for (std::int64_t i = 0; i < inner; ++i) out.push_back(cells[o * inner + i]);
  cells = std::move(out);
  collapsed[dim_pos] = false;
}

ProducerMap init_map(const TensorSpec& t, const DimSplits& splits, int producer_op) {
  for (const auto& [name, k] : splits) {
    if (!t.dim_index(name))
      throw ConfigError("tiling references absent dim " + name + " on " + t.name);
    if (k < 1) throw ConfigError("split factor must be >= 1");
  }
  ProducerMap m;
  m.tensor = t.id;
  m.dims = t.dims;
  m.collapsed.assign(t.dims.size(), true);
  std::vector<int> split_count(t.dims.size(), 1);
  for (size_t i = 0; i < t.dims.size(); ++i) {
    auto it = splits.find(t.dims[i].name);
    if (it != splits.end() && it->second > 1) {
      m.collapsed[i] = false;
      split_count[i] = std::min<std::int64_t>(it->second, t.dims[i].extent);
    }
  }
  std::int64_t vol = volume_of(m.dims, m.collapsed);
  if (vol > kMaxTrackedCells)
    throw ConfigError("dependency tracking would exceed the cell guard; collapse large dims");
  m.cells.resize(vol);

  // Tile grid is row-major over split dims only.
  std::vector<std::int64_t> idx(t.dims.size(), 0);
  for (std::int64_t flat = 0; flat < vol; ++flat) {
    std::int64_t rem = flat;
    for (int i = static_cast<int>(t.dims.size()) - 1; i >= 0; --i) {
      if (m.collapsed[i]) {
        idx[i] = 0;
        continue;
      }
      idx[i] = rem % t.dims[i].extent;
      rem /= t.dims[i].extent;
    }
    std::int64_t tile = 0;
    for (size_t i = 0; i < t.dims.size(); ++i) {
      if (split_count[i] == 1) continue;
      tile = tile * split_count[i] + tile_index_of(idx[i], t.dims[i].extent, split_count[i]);
    }
    m.cells[flat] = {TileKey{producer_op, tile}};
  }
  return m;
}

ProducerMap empty_map(const TensorSpec& t) {
  ProducerMap m;
  m.tensor = t.id;
  m.dims = t.dims;
  m.collapsed.assign(t.dims.size(), true);
  m.cells.resize(1);
  return m;
}

namespace {

// Iterate all uncollapsed index tuples of a map within a per-dim range.
template <typename Fn>
void for_each_cell(const ProducerMap& m,
                   const std::vector<std::pair<std::int64_t, std::int64_t>>& range, Fn&& fn) {
  std::vector<std::int64_t> idx(m.dims.size());
  for (size_t i = 0; i < m.dims.size(); ++i) idx[i] = m.collapsed[i] ? 0 : range[i].first;
  while (true) {
    fn(idx);
    int i = static_cast<int>(m.dims.size()) - 1;
    for (; i >= 0; --i) {
      if (m.collapsed[i]) continue;
      if (++idx[i] < range[i].first + range[i].second) break;
      idx[i] = range[i].first;
    }
    if (i < 0) return;
  }
}

ProducerMap unary_like(const ProducerMap& in) { return in; }

}  // namespace

ProducerMap propagate(const OpNode& op, const WorkloadGraph& g,
                      const std::vector<const ProducerMap*>& inputs) {
  const TensorSpec& out_t = g.tensor(op.output);
  switch (op.kind) {
    case OpKind::Exp:
    case OpKind::SiLU:
    case OpKind::Sigmoid:
    case OpKind::SoftPlus: {
      ProducerMap m = unary_like(*inputs[0]);
      m.tensor = op.output;
      return m;
    }
    case OpKind::EwAdd:
    case OpKind::EwMul: {
      ProducerMap a = *inputs[0];
      ProducerMap b = *inputs[1];
      for (size_t i = 0; i < a.dims.size(); ++i) {
        if (a.collapsed[i] != b.collapsed[i]) {
          a.expand_dim(static_cast<int>(i));
          b.expand_dim(static_cast<int>(i));
        }
      }
      ProducerMap m = a;
      m.tensor = op.output;
      for (size_t c = 0; c < m.cells.size(); ++c) merge_into(m.cells[c], b.cells[c]);
      return m;
    }
    case OpKind::ReduceSum: {
      const ProducerMap& in = *inputs[0];
      int ax = op.attrs.axis;
      ProducerMap m;
      m.tensor = op.output;
      for (size_t i = 0; i < in.dims.size(); ++i) {
        if (static_cast<int>(i) == ax) continue;
        m.dims.push_back(in.dims[i]);
        m.collapsed.push_back(in.collapsed[i]);
      }
      m.cells.resize(volume_of(m.dims, m.collapsed));
      if (in.collapsed[ax]) {
        m.cells = in.cells;
        return m;
      }
      std::vector<std::pair<std::int64_t, std::int64_t>> range;
      for (const auto& d : in.dims) range.push_back({0, d.extent});
      for_each_cell(in, range, [&](const std::vector<std::int64_t>& idx) {
        std::vector<std::int64_t> oidx;
        for (size_t i = 0; i < idx.size(); ++i)
          if (static_cast<int>(i) != ax) oidx.push_back(idx[i]);
        std::int64_t flat = 0;
        for (size_t i = 0; i < m.dims.size(); ++i)
          if (!m.collapsed[i]) flat = flat * m.dims[i].extent + oidx[i];
        merge_into(m.cells[flat], in.at(idx));
      });
      return m;
    }
    case OpKind::MatMul: {
      const ProducerMap& a = *inputs[0];
      const ProducerMap& b = *inputs[1];
      ProducerMap m;
      m.tensor = op.output;
      m.dims = {a.dims[0], b.dims[1]};
      m.collapsed = {a.collapsed[0], b.collapsed[1]};
      m.cells.resize(volume_of(m.dims, m.collapsed));
      // Row-of-A union (over K) per m, column-of-B union per p.
      auto row_union = [&](const ProducerMap& x, bool rows) {
        std::int64_t outer = x.collapsed[rows ? 0 : 1] ? 1 : x.dims[rows ? 0 : 1].extent;
        std::vector<CellSet> u(outer);
        std::vector<std::pair<std::int64_t, std::int64_t>> range{{0, x.dims[0].extent},
                                                                 {0, x.dims[1].extent}};
        for_each_cell(x, range, [&](const std::vector<std::int64_t>& idx) {
          std::int64_t o = x.collapsed[rows ? 0 : 1] ? 0 : idx[rows ? 0 : 1];
          merge_into(u[o], x.at(idx));
        });
        return u;
      };
      auto ua = row_union(a, true);
      auto ub = row_union(b, false);
      std::int64_t M = m.collapsed[0] ? 1 : m.dims[0].extent;
      std::int64_t P = m.collapsed[1] ? 1 : m.dims[1].extent;
      for (std::int64_t i = 0; i < M; ++i)
        for (std::int64_t j = 0; j < P; ++j) {
          CellSet s = merge(ua[m.collapsed[0] ? 0 : i], ub[m.collapsed[1] ? 0 : j]);
          m.cells[i * P + j] = std::move(s);
        }
      return m;
    }
    case OpKind::OuterProduct:
    case OpKind::Einsum: {
      const ProducerMap& a = *inputs[0];
      const ProducerMap& b = *inputs[1];
      ProducerMap m;
      m.tensor = op.output;
      m.dims = out_t.dims;
      m.collapsed.assign(m.dims.size(), true);
      auto pos_in = [&](const ProducerMap& x, const std::string& label) -> int {
        for (size_t i = 0; i < x.dims.size(); ++i)
          if (x.dims[i].name == label) return static_cast<int>(i);
        return -1;
      };
      for (size_t i = 0; i < m.dims.size(); ++i) {
        int pa = pos_in(a, m.dims[i].name);
        int pb = pos_in(b, m.dims[i].name);
        bool dense = (pa >= 0 && !a.collapsed[pa]) || (pb >= 0 && !b.collapsed[pb]);
        m.collapsed[i] = !dense;
      }
      if (volume_of(m.dims, m.collapsed) > kMaxTrackedCells)
        throw ConfigError("dependency tracking would exceed the cell guard");
      m.cells.resize(volume_of(m.dims, m.collapsed));
      std::vector<std::pair<std::int64_t, std::int64_t>> range;
      for (const auto& d : m.dims) range.push_back({0, d.extent});
      // Contracted labels (present in inputs, absent from output) are unioned.
      auto gather = [&](const ProducerMap& x, const std::vector<std::int64_t>& oidx) {
        CellSet u;
        std::vector<std::int64_t> xi(x.dims.size(), 0);
        std::vector<int> free_pos;
        for (size_t i = 0; i < x.dims.size(); ++i) {
          bool bound = false;
          for (size_t o = 0; o < m.dims.size(); ++o)
            if (m.dims[o].name == x.dims[i].name) {
              xi[i] = oidx[o];
              bound = true;
            }
          if (!bound && !x.collapsed[i]) free_pos.push_back(static_cast<int>(i));
        }
        // Union over unbound dense dims.
        std::function<void(size_t)> rec = [&](size_t k) {
          if (k == free_pos.size()) {
            merge_into(u, x.at(xi));
            return;
          }
          int d = free_pos[k];
          for (std::int64_t v = 0; v < x.dims[d].extent; ++v) {
            xi[d] = v;
            rec(k + 1);
          }
        };
        rec(0);
        return u;
      };
      for_each_cell(m, range, [&](const std::vector<std::int64_t>& idx) {
        std::int64_t flat = 0;
        for (size_t i = 0; i < m.dims.size(); ++i)
          if (!m.collapsed[i]) flat = flat * m.dims[i].extent + idx[i];
        CellSet s = gather(a, idx);
        merge_into(s, gather(b, idx));
        m.cells[flat] = std::move(s);
      });
      return m;
    }
    case OpKind::RMSNorm:
    case OpKind::Softmax: {
      const ProducerMap& in = *inputs[0];
      int ax = op.attrs.axis >= 0 ? op.attrs.axis : static_cast<int>(in.dims.size()) - 1;
      ProducerMap m = in;
      m.tensor = op.output;
      if (in.collapsed[ax]) return m;
      // Each output element depends on the whole normalized axis.
      std::vector<std::pair<std::int64_t, std::int64_t>> range;
      for (const auto& d : in.dims) range.push_back({0, d.extent});
      ProducerMap out = in;
      out.tensor = op.output;
      for (auto& c : out.cells) c.clear();
      for_each_cell(in, range, [&](const std::vector<std::int64_t>& idx) {
        CellSet u;
        std::vector<std::int64_t> j = idx;
        for (std::int64_t v = 0; v < in.dims[ax].extent; ++v) {
          j[ax] = v;
          merge_into(u, in.at(j));
        }
        std::int64_t flat = 0;
        for (size_t i = 0; i < in.dims.size(); ++i)
          if (!in.collapsed[i]) flat = flat * in.dims[i].extent + idx[i];
        merge_into(out.cells[flat], u);
      });
      return out;
    }
    case OpKind::Conv1dDepthwise: {
      const ProducerMap& in = *inputs[0];
      ProducerMap m = in;
      m.tensor = op.output;
      if (in.collapsed[0]) return m;
      for (auto& c : m.cells) c.clear();
      std::vector<std::pair<std::int64_t, std::int64_t>> range;
      for (const auto& d : in.dims) range.push_back({0, d.extent});
      for_each_cell(in, range, [&](const std::vector<std::int64_t>& idx) {
        CellSet u;
        std::vector<std::int64_t> j = idx;
        std::int64_t lo = std::max<std::int64_t>(0, idx[0] - (op.attrs.kernel - 1));
        for (std::int64_t v = lo; v <= idx[0]; ++v) {
          j[0] = v;
          merge_into(u, in.at(j));
        }
        std::int64_t flat = 0;
        for (size_t i = 0; i < in.dims.size(); ++i)
          if (!in.collapsed[i]) flat = flat * in.dims[i].extent + idx[i];
        m.cells[flat] = std::move(u);
      });
      return m;
    }
    case OpKind::Slice: {
      const ProducerMap& in = *inputs[0];
      int ax = op.attrs.axis;
      ProducerMap m;
      m.tensor = op.output;
      for (size_t i = 0; i < in.dims.size(); ++i) {
        if (static_cast<int>(i) == ax) continue;
        m.dims.push_back(in.dims[i]);
        m.collapsed.push_back(in.collapsed[i]);
      }
      m.cells.resize(volume_of(m.dims, m.collapsed));
      std::vector<std::pair<std::int64_t, std::int64_t>> range;
      for (size_t i = 0; i < in.dims.size(); ++i) {
        if (static_cast<int>(i) == ax)
          range.push_back({op.attrs.index, 1});
        else
          range.push_back({0, in.dims[i].extent});
      }
      std::int64_t w = 0;
      for_each_cell(in, range, [&](const std::vector<std::int64_t>& idx) {
        m.cells[w++] = in.at(idx);
      });
      return m;
    }
    case OpKind::Split: {
      const ProducerMap& in = *inputs[0];
      int ax = op.attrs.axis;
      std::int64_t off = 0;
      for (int i = 0; i < op.attrs.part; ++i) off += op.attrs.parts[i];
      std::int64_t width = op.attrs.parts[op.attrs.part];
      ProducerMap m;
      m.tensor = op.output;
      m.dims = in.dims;
      m.dims[ax].extent = width;
      m.collapsed = in.collapsed;
      m.cells.resize(volume_of(m.dims, m.collapsed));
      if (in.collapsed[ax]) {
        m.cells = in.cells;
        return m;
      }
      std::vector<std::pair<std::int64_t, std::int64_t>> range;
      for (size_t i = 0; i < in.dims.size(); ++i) {
        if (static_cast<int>(i) == ax)
          range.push_back({off, width});
        else
          range.push_back({0, in.dims[i].extent});
      }
      std::int64_t w = 0;
      for_each_cell(in, range, [&](const std::vector<std::int64_t>& idx) {
        m.cells[w++] = in.at(idx);
      });
      return m;
    }
    case OpKind::Transpose: {
      const ProducerMap& in = *inputs[0];
      ProducerMap m;
      m.tensor = op.output;
      m.dims.resize(in.dims.size());
      m.collapsed.resize(in.dims.size());
      for (size_t i = 0; i < op.attrs.perm.size(); ++i) {
        m.dims[i] = in.dims[op.attrs.perm[i]];
        m.collapsed[i] = in.collapsed[op.attrs.perm[i]];
      }
      m.cells.resize(volume_of(m.dims, m.collapsed));
      std::vector<std::pair<std::int64_t, std::int64_t>> range;
      for (const auto& d : m.dims) range.push_back({0, d.extent});
      for_each_cell(m, range, [&](const std::vector<std::int64_t>& idx) {
        std::vector<std::int64_t> src(in.dims.size());
        for (size_t i = 0; i < op.attrs.perm.size(); ++i) src[op.attrs.perm[i]] = idx[i];
        std::int64_t flat = 0;
        for (size_t i = 0; i < m.dims.size(); ++i)
          if (!m.collapsed[i]) flat = flat * m.dims[i].extent + idx[i];
        m.cells[flat] = in.at(src);
      });
      return m;
    }
    case OpKind::Reshape: {
      const ProducerMap& in = *inputs[0];
      // Broadcast form: output dims matched by label, new dims collapsed.
      bool broadcast = true;
      for (const auto& d : in.dims) {
        bool found = false;
        for (const auto& o : out_t.dims)
          if (o.name == d.name && o.extent == d.extent) found = true;
        if (!found) broadcast = false;
      }
      if (broadcast) {
        ProducerMap m;
        m.tensor = op.output;
        m.dims = out_t.dims;
        m.collapsed.assign(m.dims.size(), true);
        // Label-matched dims inherit collapse state; iteration order must be
        // rebuilt when label order changes.
        std::vector<int> src_pos(m.dims.size(), -1);
        for (size_t i = 0; i < m.dims.size(); ++i)
          for (size_t j = 0; j < in.dims.size(); ++j)
            if (in.dims[j].name == m.dims[i].name) {
              src_pos[i] = static_cast<int>(j);
              m.collapsed[i] = in.collapsed[j];
            }
        m.cells.resize(volume_of(m.dims, m.collapsed));
        std::vector<std::pair<std::int64_t, std::int64_t>> range;
        for (const auto& d : m.dims) range.push_back({0, d.extent});
        for_each_cell(m, range, [&](const std::vector<std::int64_t>& idx) {
          std::vector<std::int64_t> src(in.dims.size(), 0);
          for (size_t i = 0; i < m.dims.size(); ++i)
            if (src_pos[i] >= 0) src[src_pos[i]] = idx[i];
          std::int64_t flat = 0;
          for (size_t i = 0; i < m.dims.size(); ++i)
            if (!m.collapsed[i]) flat = flat * m.dims[i].extent + idx[i];
          m.cells[flat] = in.at(src);
        });
        return m;
      }
      // Row-major relayout requires dense cells.
      ProducerMap dense = in;
      for (size_t i = 0; i < dense.dims.size(); ++i) dense.expand_dim(static_cast<int>(i));
      ProducerMap m;
      m.tensor = op.output;
      m.dims = out_t.dims;
      m.collapsed.assign(m.dims.size(), false);
      if (out_t.elements() > kMaxTrackedCells)
        throw ConfigError("dependency tracking would exceed the cell guard");
      m.cells = dense.cells;  // same flat order
      return m;
    }
    case OpKind::Concat: {
      int ax = op.attrs.axis;
      // Expand all inputs to a common collapse pattern, then stack.
      std::vector<ProducerMap> ins;
      for (const auto* p : inputs) ins.push_back(*p);
      for (size_t d = 0; d < ins[0].dims.size(); ++d) {
        bool dense = static_cast<int>(d) == ax;
        for (const auto& x : ins)
          if (!x.collapsed[d]) dense = true;
        if (dense)
          for (auto& x : ins) x.expand_dim(static_cast<int>(d));
      }
      ProducerMap m;
      m.tensor = op.output;
      m.dims = out_t.dims;
      m.collapsed = ins[0].collapsed;
      m.cells.resize(volume_of(m.dims, m.collapsed));
      std::int64_t w = 0;
      // Row-major over uncollapsed dims; the concat axis is outermost only if
      // it is dim 0, so iterate output indices directly.
      std::vector<std::pair<std::int64_t, std::int64_t>> range;
      for (const auto& d : m.dims) range.push_back({0, d.extent});
      for_each_cell(m, range, [&](const std::vector<std::int64_t>& idx) {
        std::int64_t pos = idx[ax];
        std::int64_t off = 0;
        size_t which = 0;
        for (; which < ins.size(); ++which) {
          std::int64_t ext = ins[which].dims[ax].extent;
          if (pos < off + ext) break;
          off += ext;
        }
        std::vector<std::int64_t> src = idx;
        src[ax] = pos - off;
        std::int64_t flat = 0;
        for (size_t i = 0; i < m.dims.size(); ++i)
          if (!m.collapsed[i]) flat = flat * m.dims[i].extent + idx[i];
        m.cells[flat] = ins[which].at(src);
      });
      (void)w;
      return m;
    }
  }
  throw ConfigError(std::string("propagate: unsupported kind ") + to_string(op.kind));
}

std::map<int, ProducerMap> build_producer_maps(const WorkloadGraph& g,
                                               const TilingMap& tiling) {
  std::map<int, ProducerMap> maps;
  for (int tid : g.input_tensors()) maps.emplace(tid, empty_map(g.tensor(tid)));
  for (int oid : topo_order(g)) {
    const OpNode& n = g.op(oid);
    if (is_data_movement(n.kind)) {
      std::vector<const ProducerMap*> in;
      for (int t : n.inputs) in.push_back(&maps.at(t));
      maps.emplace(n.output, propagate(n, g, in));
    } else {
      DimSplits splits;
      auto it = tiling.find(n.output);
      if (it != tiling.end()) splits = it->second;
      maps.emplace(n.output, init_map(g.tensor(n.output), splits, oid));
    }
  }
  return maps;
}

std::set<TileDep> infer_tile_deps(const WorkloadGraph& g, const TilingMap& tiling) {
  auto maps = build_producer_maps(g, tiling);
  std::set<TileDep> deps;

  for (int oid : topo_order(g)) {
    const OpNode& n = g.op(oid);
    if (is_data_movement(n.kind)) continue;
    const TensorSpec& out = g.tensor(n.output);

    DimSplits splits;
    auto it = tiling.find(n.output);
    if (it != tiling.end()) splits = it->second;
    std::vector<int> split_count(out.dims.size(), 1);
    std::int64_t n_tiles = 1;
    for (size_t i = 0; i < out.dims.size(); ++i) {
      auto s = splits.find(out.dims[i].name);
      if (s != splits.end())
        split_count[i] = static_cast<int>(std::min<std::int64_t>(s->second, out.dims[i].extent));
      n_tiles *= split_count[i];
    }

    for (std::int64_t tile = 0; tile < n_tiles; ++tile) {
      // Output region of this tile.
      Region out_region;
      out_region.span.resize(out.dims.size());
      std::int64_t rem = tile;
      for (int i = static_cast<int>(out.dims.size()) - 1; i >= 0; --i) {
        int ti = static_cast<int>(rem % split_count[i]);
        rem /= split_count[i];
        out_region.span[i] = tile_range(out.dims[i].extent, split_count[i], ti);
      }
      TileKey consumer{oid, tile};
      for (size_t pos = 0; pos < n.inputs.size(); ++pos) {
        Region in_region = input_region_for(n, g, static_cast<int>(pos), out_region);
        const ProducerMap& pm = maps.at(n.inputs[pos]);
        std::vector<std::pair<std::int64_t, std::int64_t>> range(in_region.span.begin(),
                                                                 in_region.span.end());
        CellSet u;
        for_each_cell(pm, range, [&](const std::vector<std::int64_t>& idx) {
          merge_into(u, pm.at(idx));
        });
        for (const TileKey& p : u)
          if (!(p.op == oid && p.flat == tile)) deps.insert({consumer, p});
      }
    }
  }
  return deps;
}

std::string tile_deps_to_dot(const WorkloadGraph& g, const std::set<TileDep>& deps) {
  std::ostringstream os;
  os << "digraph tiles {\n";
  auto label = [&](const TileKey& k) {
    std::ostringstream s;
    s << "\"" << g.tensor(g.op(k.op).output).name << "#" << k.flat << "\"";
    return s.str();
  };
  for (const auto& d : deps) os << "  " << label(d.producer) << " -> " << label(d.consumer) << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace ssmfusim
