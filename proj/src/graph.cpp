#include "ssmfusim/graph.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace ssmfusim {

bool operator==(const Dim& a, const Dim& b) {
  return a.name == b.name && a.extent == b.extent;
}

std::int64_t TensorSpec::elements() const {
  std::int64_t n = 1;
  for (const auto& d : dims) n *= d.extent;
  return n;
}

std::optional<int> TensorSpec::dim_index(const std::string& label) const {
  for (size_t i = 0; i < dims.size(); ++i)
    if (dims[i].name == label) return static_cast<int>(i);
  return std::nullopt;
}

bool is_data_movement(OpKind k) {
  switch (k) {
    case OpKind::Slice:
    case OpKind::Split:
    case OpKind::Transpose:
    case OpKind::Reshape:
    case OpKind::Concat:
      return true;
    default:
      return false;
  }
}

bool is_unary_compute(OpKind k) {
  switch (k) {
    case OpKind::Exp:
    case OpKind::SiLU:
    case OpKind::Sigmoid:
    case OpKind::SoftPlus:
      return true;
    default:
      return false;
  }
}

const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::MatMul: return "matmul";
    case OpKind::Einsum: return "einsum";
    case OpKind::EwAdd: return "ew_add";
    case OpKind::EwMul: return "ew_mul";
    case OpKind::Exp: return "exp";
    case OpKind::SiLU: return "silu";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::SoftPlus: return "softplus";
    case OpKind::OuterProduct: return "outer_product";
    case OpKind::ReduceSum: return "reduce_sum";
    case OpKind::Slice: return "slice";
    case OpKind::Split: return "split";
    case OpKind::Transpose: return "transpose";
    case OpKind::Reshape: return "reshape";
    case OpKind::Concat: return "concat";
    case OpKind::Conv1dDepthwise: return "conv1d_dw";
    case OpKind::RMSNorm: return "rms_norm";
    case OpKind::Softmax: return "softmax";
  }
  return "?";
}

const char* to_string(OpClass c) {
  switch (c) {
    case OpClass::Projection: return "projection";
    case OpClass::Attention: return "attention";
    case OpClass::StateUpdate: return "state_update";
    case OpClass::Normalization: return "normalization";
    case OpClass::Elementwise: return "elementwise";
    case OpClass::Activation: return "activation";
  }
  return "?";
}

const char* to_string(TensorKind k) {
  switch (k) {
    case TensorKind::Weight: return "weight";
    case TensorKind::Activation: return "activation";
    case TensorKind::State: return "state";
  }
  return "?";
}

const char* to_string(Stage s) {
  return s == Stage::Prefill ? "prefill" : "decode";
}

template <typename E, size_t N>
static E enum_from_string(const std::string& s, const std::array<std::pair<const char*, E>, N>& table,
                          const char* what) {
  for (const auto& [k, v] : table)
    if (s == k) return v;
  throw ConfigError(std::string("unknown ") + what + ": " + s);
}

OpKind op_kind_from_string(const std::string& s) {
  static const std::array<std::pair<const char*, OpKind>, 18> t{{
      {"matmul", OpKind::MatMul}, {"einsum", OpKind::Einsum},
      {"ew_add", OpKind::EwAdd}, {"ew_mul", OpKind::EwMul},
      {"exp", OpKind::Exp}, {"silu", OpKind::SiLU},
      {"sigmoid", OpKind::Sigmoid}, {"softplus", OpKind::SoftPlus},
      {"outer_product", OpKind::OuterProduct}, {"reduce_sum", OpKind::ReduceSum},
      {"slice", OpKind::Slice}, {"split", OpKind::Split},
      {"transpose", OpKind::Transpose}, {"reshape", OpKind::Reshape},
      {"concat", OpKind::Concat}, {"conv1d_dw", OpKind::Conv1dDepthwise},
      {"rms_norm", OpKind::RMSNorm}, {"softmax", OpKind::Softmax},
  }};
  return enum_from_string(s, t, "op kind");
}

OpClass op_class_from_string(const std::string& s) {
  static const std::array<std::pair<const char*, OpClass>, 6> t{{
      {"projection", OpClass::Projection}, {"attention", OpClass::Attention},
      {"state_update", OpClass::StateUpdate}, {"normalization", OpClass::Normalization},
      {"elementwise", OpClass::Elementwise}, {"activation", OpClass::Activation},
  }};
  return enum_from_string(s, t, "op class");
}

TensorKind tensor_kind_from_string(const std::string& s) {
  static const std::array<std::pair<const char*, TensorKind>, 3> t{{
      {"weight", TensorKind::Weight},
      {"activation", TensorKind::Activation},
      {"state", TensorKind::State},
  }};
  return enum_from_string(s, t, "tensor kind");
}

Stage stage_from_string(const std::string& s) {
  static const std::array<std::pair<const char*, Stage>, 2> t{{
      {"prefill", Stage::Prefill}, {"decode", Stage::Decode},
  }};
  return enum_from_string(s, t, "stage");
}

int WorkloadGraph::add_tensor(std::string name, std::vector<Dim> dims,
                              TensorKind kind, int element_bits) {
  TensorSpec t;
  t.id = static_cast<int>(tensors.size());
  t.name = std::move(name);
  t.dims = std::move(dims);
  t.kind = kind;
  t.element_bits = element_bits;
  tensors.push_back(std::move(t));
  index_dirty_ = true;
  return tensors.back().id;
}

int WorkloadGraph::add_op(OpKind kind, OpClass cls, std::vector<int> inputs,
                          int output, OpAttrs attrs) {
  OpNode n;
  n.id = static_cast<int>(ops.size());
  n.kind = kind;
  n.op_class = cls;
  n.inputs = std::move(inputs);
  n.output = output;
  n.attrs = std::move(attrs);
  ops.push_back(std::move(n));
  index_dirty_ = true;
  return ops.back().id;
}

const TensorSpec& WorkloadGraph::tensor(int id) const {
  if (id < 0 || id >= static_cast<int>(tensors.size()))
    throw ConfigError("unknown tensor id " + std::to_string(id));
  return tensors[id];
}

const OpNode& WorkloadGraph::op(int id) const {
  if (id < 0 || id >= static_cast<int>(ops.size()))
    throw ConfigError("unknown op id " + std::to_string(id));
  return ops[id];
}

void WorkloadGraph::rebuild_index() const {
  if (!index_dirty_) return;
  producer_.assign(tensors.size(), -1);
  consumers_.assign(tensors.size(), {});
  for (const auto& n : ops) {
    if (n.output >= 0 && n.output < static_cast<int>(tensors.size()))
      producer_[n.output] = n.id;
    for (int in : n.inputs)
      if (in >= 0 && in < static_cast<int>(tensors.size())) consumers_[in].push_back(n.id);
  }
  index_dirty_ = false;
}

int WorkloadGraph::producer_of(int tensor_id) const {
  rebuild_index();
  return producer_[tensor_id];
}

const std::vector<int>& WorkloadGraph::consumers_of(int tensor_id) const {
  rebuild_index();
  return consumers_[tensor_id];
}

std::vector<int> WorkloadGraph::input_tensors() const {
  std::vector<int> out;
  for (const auto& t : tensors)
    if (producer_of(t.id) < 0) out.push_back(t.id);
  return out;
}

std::vector<int> WorkloadGraph::output_tensors() const {
  std::vector<int> out;
  for (const auto& t : tensors)
    if (consumers_of(t.id).empty()) out.push_back(t.id);
  return out;
}

std::int64_t tensor_bytes(const TensorSpec& t) {
  return t.elements() * t.element_bits / 8;
}

// ---------------------------------------------------------------------------
// Shape inference

static std::string dims_str(const std::vector<Dim>& dims) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < dims.size(); ++i) {
    if (i) os << ",";
    os << dims[i].name << "=" << dims[i].extent;
  }
  os << ")";
  return os.str();
}

std::optional<std::vector<Dim>> infer_output_dims(const OpNode& node,
                                                  const WorkloadGraph& g,
                                                  std::string* error) {
  auto fail = [&](const std::string& msg) -> std::optional<std::vector<Dim>> {
    if (error) *error = msg;
    return std::nullopt;
  };
  std::vector<const TensorSpec*> in;
  for (int t : node.inputs) in.push_back(&g.tensor(t));

  switch (node.kind) {
    case OpKind::MatMul: {
      if (in.size() != 2) return fail("matmul needs 2 inputs");
      if (in[0]->rank() != 2 || in[1]->rank() != 2) return fail("matmul inputs must be rank 2");
      const Dim& k0 = in[0]->dims[1];
      const Dim& k1 = in[1]->dims[0];
      if (k0.extent != k1.extent)
        return fail("matmul K mismatch " + std::to_string(k0.extent) + " vs " +
                    std::to_string(k1.extent));
      return std::vector<Dim>{in[0]->dims[0], in[1]->dims[1]};
    }
    case OpKind::OuterProduct:
    case OpKind::Einsum: {
      if (in.size() != 2) return fail("needs 2 inputs");
      // Label-matched product; output carries the union of labels in
      // first-input order followed by unseen labels of the second.
      std::vector<Dim> out = in[0]->dims;
      for (const auto& d : in[1]->dims) {
        bool found = false;
        for (auto& o : out) {
          if (o.name == d.name) {
            if (o.extent != d.extent)
              return fail("label extent mismatch on " + d.name);
            found = true;
          }
        }
        if (!found) out.push_back(d);
      }
      return out;
    }
    case OpKind::EwAdd:
    case OpKind::EwMul: {
      if (in.size() != 2) return fail("needs 2 inputs");
      if (!(in[0]->dims.size() == in[1]->dims.size())) return fail("rank mismatch");
      for (size_t i = 0; i < in[0]->dims.size(); ++i)
        if (in[0]->dims[i].extent != in[1]->dims[i].extent)
          return fail("extent mismatch " + dims_str(in[0]->dims) + " vs " + dims_str(in[1]->dims));
      return in[0]->dims;
    }
    case OpKind::Exp:
    case OpKind::SiLU:
    case OpKind::Sigmoid:
    case OpKind::SoftPlus: {
      if (in.size() != 1) return fail("needs 1 input");
      return in[0]->dims;
    }
    case OpKind::RMSNorm: {
      if (in.empty() || in.size() > 2) return fail("needs 1 or 2 inputs");
      return in[0]->dims;
    }
    case OpKind::Softmax: {
      if (in.size() != 1) return fail("needs 1 input");
      if (node.attrs.axis < 0 || node.attrs.axis >= in[0]->rank()) return fail("bad axis");
      return in[0]->dims;
    }
    case OpKind::ReduceSum: {
      if (in.size() != 1) return fail("needs 1 input");
      if (node.attrs.axis < 0 || node.attrs.axis >= in[0]->rank()) return fail("bad axis");
      std::vector<Dim> out;
      for (int i = 0; i < in[0]->rank(); ++i)
        if (i != node.attrs.axis) out.push_back(in[0]->dims[i]);
      return out;
    }
    case OpKind::Slice: {
      if (in.size() != 1) return fail("needs 1 input");
      int ax = node.attrs.axis;
      if (ax < 0 || ax >= in[0]->rank()) return fail("bad axis");
      if (node.attrs.index < 0 || node.attrs.index >= in[0]->dims[ax].extent)
        return fail("slice index out of range");
      std::vector<Dim> out;
      for (int i = 0; i < in[0]->rank(); ++i)
        if (i != ax) out.push_back(in[0]->dims[i]);
      return out;
    }
    case OpKind::Split: {
      if (in.size() != 1) return fail("needs 1 input");
      int ax = node.attrs.axis;
      if (ax < 0 || ax >= in[0]->rank()) return fail("bad axis");
      std::int64_t total = 0;
      for (auto p : node.attrs.parts) total += p;
      if (total != in[0]->dims[ax].extent) return fail("split parts don't cover axis");
      if (node.attrs.part < 0 || node.attrs.part >= static_cast<int>(node.attrs.parts.size()))
        return fail("bad split part");
      std::vector<Dim> out = in[0]->dims;
      out[ax].extent = node.attrs.parts[node.attrs.part];
      return out;
    }
    case OpKind::Transpose: {
      if (in.size() != 1) return fail("needs 1 input");
      if (static_cast<std::int64_t>(node.attrs.perm.size()) != in[0]->rank())
        return fail("perm rank mismatch");
      std::vector<Dim> out(in[0]->dims.size());
      std::vector<bool> seen(in[0]->dims.size(), false);
      for (size_t i = 0; i < node.attrs.perm.size(); ++i) {
        int p = node.attrs.perm[i];
        if (p < 0 || p >= in[0]->rank() || seen[p]) return fail("bad perm");
        seen[p] = true;
        out[i] = in[0]->dims[p];
      }
      return out;
    }
    case OpKind::Reshape: {
      if (in.size() != 1) return fail("needs 1 input");
      if (node.attrs.out_dims.empty()) return fail("reshape needs out_dims");
      // Broadcast form: every input label appears in the output with the same
      // extent. Otherwise row-major with equal element count.
      bool broadcast = true;
      for (const auto& d : in[0]->dims) {
        bool found = false;
        for (const auto& o : node.attrs.out_dims)
          if (o.name == d.name && o.extent == d.extent) found = true;
        if (!found) broadcast = false;
      }
      if (!broadcast) {
        std::int64_t n = 1;
        for (const auto& o : node.attrs.out_dims) n *= o.extent;
        if (n != in[0]->elements()) return fail("reshape element count mismatch");
      }
      return node.attrs.out_dims;
    }
    case OpKind::Concat: {
      if (in.empty()) return fail("needs inputs");
      int ax = node.attrs.axis;
      std::vector<Dim> out = in[0]->dims;
      if (ax < 0 || ax >= in[0]->rank()) return fail("bad axis");
      std::int64_t total = 0;
      for (const auto* t : in) {
        if (t->rank() != in[0]->rank()) return fail("concat rank mismatch");
        for (int i = 0; i < t->rank(); ++i)
          if (i != ax && t->dims[i].extent != out[i].extent)
            return fail("concat non-axis extent mismatch");
        total += t->dims[ax].extent;
      }
      out[ax].extent = total;
      return out;
    }
    case OpKind::Conv1dDepthwise: {
      if (in.size() < 1) return fail("needs input");
      if (node.attrs.kernel < 1) return fail("bad kernel");
      return in[0]->dims;  // same-padded causal conv along the leading dim
    }
  }
  return fail("unhandled kind");
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Violation> validate(const WorkloadGraph& g) {
  std::vector<Violation> v;
  for (const auto& t : g.tensors) {
    for (const auto& d : t.dims)
      if (d.extent < 1)
        v.push_back({t.id, "extent", "tensor " + t.name + " has extent < 1 on " + d.name});
    if (t.element_bits % 8 != 0)
      v.push_back({t.id, "element_bits", "tensor " + t.name + " bits not divisible by 8"});
    if (t.kind == TensorKind::State && t.dim_index("L"))
      v.push_back({t.id, "state_no_L", "state tensor " + t.name + " carries an L dim"});
  }

  std::vector<int> producers(g.tensors.size(), -1);
  auto valid_tensor = [&](int id) { return id >= 0 && id < static_cast<int>(g.tensors.size()); };
  for (const auto& n : g.ops) {
    if (!valid_tensor(n.output)) continue;
    if (producers[n.output] >= 0)
      v.push_back({n.id, "multi_producer",
                   "tensor " + std::to_string(n.output) + " produced by ops " +
                       std::to_string(producers[n.output]) + " and " + std::to_string(n.id)});
    producers[n.output] = n.id;
  }

  for (const auto& n : g.ops) {
    bool ok = true;
    for (int in : n.inputs)
      if (!valid_tensor(in)) {
        v.push_back({n.id, "dangling_input", "op references missing tensor " + std::to_string(in)});
        ok = false;
      }
    if (!valid_tensor(n.output)) {
      v.push_back({n.id, "dangling_output",
                   "op references missing tensor " + std::to_string(n.output)});
      continue;
    }
    if (!ok) continue;
    std::string err;
    auto dims = infer_output_dims(n, g, &err);
    if (!dims) {
      v.push_back({n.id, "dim_mismatch", std::string(to_string(n.kind)) + ": " + err});
      continue;
    }
    const auto& out = g.tensor(n.output).dims;
    if (dims->size() != out.size()) {
      v.push_back({n.id, "dim_mismatch", std::string(to_string(n.kind)) + ": output rank"});
      continue;
    }
    for (size_t i = 0; i < out.size(); ++i)
      if ((*dims)[i].extent != out[i].extent)
        v.push_back({n.id, "dim_mismatch",
                     std::string(to_string(n.kind)) + ": output extent on axis " + std::to_string(i)});
  }

  try {
    topo_order(g);
  } catch (const ConfigError&) {
    v.push_back({-1, "cycle", "graph contains a dependency cycle"});
  }

  for (const auto& t : g.tensors) {
    if (g.producer_of(t.id) < 0 && g.consumers_of(t.id).empty())
      v.push_back({t.id, "unused", "tensor " + t.name + " is neither produced nor consumed"});
  }
  return v;
}

std::vector<int> topo_order(const WorkloadGraph& g) {
  std::vector<int> indeg(g.ops.size(), 0);
  std::vector<std::vector<int>> succ(g.ops.size());
  for (const auto& n : g.ops) {
    for (int in : n.inputs) {
      int p = g.producer_of(in);
      if (p >= 0) {
        succ[p].push_back(n.id);
        indeg[n.id]++;
      }
    }
  }
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (const auto& n : g.ops)
    if (indeg[n.id] == 0) ready.push(n.id);
  std::vector<int> order;
  order.reserve(g.ops.size());
  while (!ready.empty()) {
    int id = ready.top();
    ready.pop();
    order.push_back(id);
    for (int s : succ[id])
      if (--indeg[s] == 0) ready.push(s);
  }
  if (order.size() != g.ops.size()) throw ConfigError("cycle detected in workload graph");
  return order;
}

// ---------------------------------------------------------------------------
// Operation counting

std::int64_t op_count(const OpNode& node, const WorkloadGraph& g) {
  if (is_data_movement(node.kind)) return 0;
  const TensorSpec& out = g.tensor(node.output);
  std::int64_t e = out.elements();
  switch (node.kind) {
    case OpKind::MatMul: {
      const TensorSpec& a = g.tensor(node.inputs[0]);
      return 2 * a.dims[0].extent * a.dims[1].extent * g.tensor(node.inputs[1]).dims[1].extent;
    }
    case OpKind::Einsum:
    case OpKind::OuterProduct: {
      // Einsum-family counting: one MAC-equivalent (2 ops) per iteration of
      // the full label space.
      std::vector<Dim> space = g.tensor(node.inputs[0]).dims;
      for (const auto& d : g.tensor(node.inputs[1]).dims) {
        bool found = false;
        for (const auto& s : space)
          if (s.name == d.name) found = true;
        if (!found) space.push_back(d);
      }
      std::int64_t iters = 1;
      for (const auto& d : space) iters *= d.extent;
      return 2 * iters;
    }
    case OpKind::EwAdd:
    case OpKind::EwMul:
    case OpKind::Exp:
    case OpKind::SiLU:
    case OpKind::Sigmoid:
    case OpKind::SoftPlus:
      return e;
    case OpKind::ReduceSum: {
      const TensorSpec& in = g.tensor(node.inputs[0]);
      std::int64_t ein = in.elements();
      return ein - ein / in.dims[node.attrs.axis].extent;
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

std::int64_t parallel_extent(const OpNode& node, const WorkloadGraph& g) {
  if (is_data_movement(node.kind)) return 1;
  return g.tensor(node.output).elements();
}

// ---------------------------------------------------------------------------
// Region tracing

Region Region::full(const TensorSpec& t) {
  Region r;
  for (const auto& d : t.dims) r.span.push_back({0, d.extent});
  return r;
}

std::int64_t Region::volume() const {
  std::int64_t v = 1;
  for (const auto& [o, s] : span) v *= s;
  return v;
}

static void trace_rec(const WorkloadGraph& g, int tensor_id, const Region& region,
                      std::vector<PhysicalRead>& out) {
  int p = g.producer_of(tensor_id);
  if (p < 0 || !is_data_movement(g.op(p).kind)) {
    out.push_back({tensor_id, region});
    return;
  }
  const OpNode& n = g.op(p);
  switch (n.kind) {
    case OpKind::Slice: {
      Region r;
      int ax = n.attrs.axis;
      for (int i = 0, j = 0; i < g.tensor(n.inputs[0]).rank(); ++i) {
        if (i == ax)
          r.span.push_back({n.attrs.index, 1});
        else
          r.span.push_back(region.span[j++]);
      }
      trace_rec(g, n.inputs[0], r, out);
      return;
    }
    case OpKind::Split: {
      Region r = region;
      std::int64_t off = 0;
      for (int i = 0; i < n.attrs.part; ++i) off += n.attrs.parts[i];
      r.span[n.attrs.axis].first += off;
      trace_rec(g, n.inputs[0], r, out);
      return;
    }
    case OpKind::Transpose: {
      Region r;
      r.span.resize(region.span.size());
      for (size_t i = 0; i < n.attrs.perm.size(); ++i) r.span[n.attrs.perm[i]] = region.span[i];
      trace_rec(g, n.inputs[0], r, out);
      return;
    }
    case OpKind::Reshape: {
      const TensorSpec& src = g.tensor(n.inputs[0]);
      // Broadcast form: keep spans of the labels present in the source.
      Region r;
      bool broadcast = true;
      for (const auto& d : src.dims) {
        bool matched = false;
        for (size_t i = 0; i < n.attrs.out_dims.size(); ++i) {
          if (n.attrs.out_dims[i].name == d.name && n.attrs.out_dims[i].extent == d.extent) {
            r.span.push_back(region.span[i]);
            matched = true;
            break;
          }
        }
        if (!matched) broadcast = false;
      }
      if (broadcast) {
        trace_rec(g, n.inputs[0], r, out);
        return;
      }
      // Row-major relayout: only whole-tensor reads are traced exactly.
      bool whole = true;
      for (size_t i = 0; i < region.span.size(); ++i)
        if (region.span[i].first != 0 || region.span[i].second != n.attrs.out_dims[i].extent)
          whole = false;
      if (!whole) throw ConfigError("partial read through row-major reshape is unsupported");
      trace_rec(g, n.inputs[0], Region::full(src), out);
      return;
    }
    case OpKind::Concat: {
      int ax = n.attrs.axis;
      std::int64_t lo = region.span[ax].first;
      std::int64_t hi = lo + region.span[ax].second;
      std::int64_t off = 0;
      for (int in : n.inputs) {
        const TensorSpec& t = g.tensor(in);
        std::int64_t ext = t.dims[ax].extent;
        std::int64_t s = std::max(lo, off);
        std::int64_t e = std::min(hi, off + ext);
        if (s < e) {
          Region r = region;
          r.span[ax] = {s - off, e - s};
          trace_rec(g, in, r, out);
        }
        off += ext;
      }
      return;
    }
    default:
      out.push_back({tensor_id, region});
      return;
  }
}

std::vector<PhysicalRead> trace_physical_reads(const WorkloadGraph& g, int tensor_id,
                                               const Region& region) {
  std::vector<PhysicalRead> out;
  trace_rec(g, tensor_id, region, out);
  return out;
}

Region input_region_for(const OpNode& node, const WorkloadGraph& g, int input_pos,
                        const Region& out_region) {
  const TensorSpec& in = g.tensor(node.inputs[input_pos]);
  const TensorSpec& out = g.tensor(node.output);
  switch (node.kind) {
    case OpKind::EwAdd:
    case OpKind::EwMul:
    case OpKind::Exp:
    case OpKind::SiLU:
    case OpKind::Sigmoid:
    case OpKind::SoftPlus:
      return out_region;
    case OpKind::RMSNorm:
    case OpKind::Softmax: {
      if (input_pos > 0) return Region::full(in);  // scale weights
      // Normalization spans the trailing (or `axis`) dim entirely.
      Region r = out_region;
      int ax = node.attrs.axis >= 0 ? node.attrs.axis : static_cast<int>(r.span.size()) - 1;
      r.span[ax] = {0, in.dims[ax].extent};
      return r;
    }
    case OpKind::ReduceSum: {
      Region r;
      int ax = node.attrs.axis;
      for (int i = 0, j = 0; i < in.rank(); ++i) {
        if (i == ax)
          r.span.push_back({0, in.dims[ax].extent});
        else
          r.span.push_back(out_region.span[j++]);
      }
      return r;
    }
    case OpKind::MatMul: {
      if (input_pos == 0)
        return Region{{out_region.span[0], {0, in.dims[1].extent}}};
      return Region{{{0, in.dims[0].extent}, out_region.span[1]}};
    }
    case OpKind::OuterProduct:
    case OpKind::Einsum: {
      // Project the output region onto the input's labels.
      Region r;
      for (const auto& d : in.dims) {
        bool found = false;
        for (size_t i = 0; i < out.dims.size(); ++i) {
          if (out.dims[i].name == d.name) {
            r.span.push_back(out_region.span[i]);
            found = true;
            break;
          }
        }
        if (!found) r.span.push_back({0, d.extent});  // contracted label
      }
      return r;
    }
    case OpKind::Conv1dDepthwise: {
      if (input_pos > 0) return Region::full(in);  // kernel weights
      Region r = out_region;
      // Causal window along the leading dim.
      auto& [off, sz] = r.span[0];
      std::int64_t lo = std::max<std::int64_t>(0, off - (node.attrs.kernel - 1));
      std::int64_t hi = off + sz;
      r.span[0] = {lo, hi - lo};
      return r;
    }
    default:
      return Region::full(in);
  }
}

}  // namespace ssmfusim
