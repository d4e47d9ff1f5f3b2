#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssmfusim {

enum class TensorKind { Weight, Activation, State };

enum class OpClass {
  Projection,
  Attention,
  StateUpdate,
  Normalization,
  Elementwise,
  Activation,
};

enum class OpKind {
  MatMul,
  Einsum,
  EwAdd,
  EwMul,
  Exp,
  SiLU,
  Sigmoid,
  SoftPlus,
  OuterProduct,
  ReduceSum,
  Slice,
  Split,
  Transpose,
  Reshape,
  Concat,
  Conv1dDepthwise,
  RMSNorm,
  Softmax,
};

enum class Stage { Prefill, Decode };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Symbolic dimension label with extent (L, D, N, ... or user-defined).
struct Dim {
  std::string name;
  std::int64_t extent = 1;
};

bool operator==(const Dim& a, const Dim& b);

struct TensorSpec {
  int id = -1;
  std::string name;
  std::vector<Dim> dims;
  int element_bits = 32;
  TensorKind kind = TensorKind::Activation;

  std::int64_t elements() const;
  std::int64_t rank() const { return static_cast<std::int64_t>(dims.size()); }
  std::optional<int> dim_index(const std::string& label) const;
};

/// Per-kind operator attributes. Only the fields relevant to the kind are set.
struct OpAttrs {
  int axis = -1;                  // ReduceSum, Slice, Split, Concat, Softmax
  std::int64_t index = -1;        // Slice
  std::vector<std::int64_t> parts;  // Split: part sizes along axis
  int part = -1;                  // Split: which part this node extracts
  std::vector<int> perm;          // Transpose
  std::int64_t kernel = 0;        // Conv1dDepthwise
  std::vector<Dim> out_dims;      // Reshape target shape
};

struct OpNode {
  int id = -1;
  OpKind kind = OpKind::EwMul;
  OpAttrs attrs;
  std::vector<int> inputs;
  int output = -1;
  OpClass op_class = OpClass::Elementwise;
};

bool is_data_movement(OpKind k);
bool is_unary_compute(OpKind k);

const char* to_string(OpKind k);
const char* to_string(OpClass c);
const char* to_string(TensorKind k);
const char* to_string(Stage s);
OpKind op_kind_from_string(const std::string& s);
OpClass op_class_from_string(const std::string& s);
TensorKind tensor_kind_from_string(const std::string& s);
Stage stage_from_string(const std::string& s);

/// Typed operator DAG over named tensors. Ids are dense indices into the
/// tensor/op tables. Movement ops (Slice/Split/Transpose/Reshape/Concat)
/// restructure index space without arithmetic.
struct WorkloadGraph {
  std::vector<TensorSpec> tensors;  // id == index
  std::vector<OpNode> ops;          // id == index
  Stage stage = Stage::Prefill;

  int add_tensor(std::string name, std::vector<Dim> dims,
                 TensorKind kind = TensorKind::Activation, int element_bits = 32);
  int add_op(OpKind kind, OpClass cls, std::vector<int> inputs, int output,
             OpAttrs attrs = {});

  const TensorSpec& tensor(int id) const;
  const OpNode& op(int id) const;

  /// Op producing this tensor, or -1 for graph inputs.
  int producer_of(int tensor_id) const;
  /// Ops reading this tensor, ascending op id.
  const std::vector<int>& consumers_of(int tensor_id) const;
  /// Tensors not produced by any op.
  std::vector<int> input_tensors() const;
  /// Tensors not consumed by any op.
  std::vector<int> output_tensors() const;

private:
  mutable bool index_dirty_ = true;
  mutable std::vector<int> producer_;
  mutable std::vector<std::vector<int>> consumers_;
  void rebuild_index() const;

public:
  void touch() { index_dirty_ = true; }
};

struct Violation {
  int node_id = -1;  // op or tensor id, depending on rule
  std::string rule;
  std::string detail;
};

/// Structural and shape validation; empty result means the graph is well formed.
std::vector<Violation> validate(const WorkloadGraph& g);

/// Scalar operation count (1 op = one multiply, add, or nonlinear evaluation;
/// one MAC counts as 2 ops). Data movement kinds count 0.
std::int64_t op_count(const OpNode& node, const WorkloadGraph& g);

/// Number of independently computable output elements, used for spatial
/// utilization modeling.
std::int64_t parallel_extent(const OpNode& node, const WorkloadGraph& g);

std::int64_t tensor_bytes(const TensorSpec& t);

/// Deterministic topological order (ties broken by ascending op id).
/// Throws ConfigError on a cycle.
std::vector<int> topo_order(const WorkloadGraph& g);

/// Expected output shape of an op given input shapes; used by validate().
std::optional<std::vector<Dim>> infer_output_dims(const OpNode& node,
                                                  const WorkloadGraph& g,
                                                  std::string* error = nullptr);

// ---------------------------------------------------------------------------
// Region algebra: axis-aligned element ranges, used to trace reads through
// movement operators back to the physical producing tensors.

struct Region {
  // (offset, size) per dim of the tensor the region refers to.
  std::vector<std::pair<std::int64_t, std::int64_t>> span;

  static Region full(const TensorSpec& t);
  std::int64_t volume() const;
  bool operator==(const Region& o) const { return span == o.span; }
  bool operator<(const Region& o) const { return span < o.span; }
};

struct PhysicalRead {
  int tensor_id = -1;
  Region region;
};

/// Resolve a read of `region` on `tensor_id` through any chain of movement
/// producers to reads on physically materialized tensors (compute outputs or
/// graph inputs).
std::vector<PhysicalRead> trace_physical_reads(const WorkloadGraph& g,
                                               int tensor_id, const Region& region);

/// Region of input `input_pos` that one output-region computation of `node`
/// reads. Covers compute kinds only.
Region input_region_for(const OpNode& node, const WorkloadGraph& g,
                        int input_pos, const Region& out_region);

}  // namespace ssmfusim
