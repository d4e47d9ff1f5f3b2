#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssmfusim/graph.hpp"

namespace ssmfusim {

struct MambaConfig {
  int d_model = 2560;
  int expand = 2;
  int n_state = 64;  // N
  int dt_rank = 160;
  int conv_kernel = 4;
  int n_layers = 64;
  std::int64_t L = 1024;
  Stage stage = Stage::Prefill;

  int d_inner() const { return d_model * expand; }  // D
  void check() const;
};

MambaConfig mamba_2_8b_preset();

struct TransformerConfig {
  int d_model = 2560;
  int n_heads = 32;
  int d_ff = 10240;
  int n_layers = 32;
  std::int64_t L = 1024;
  Stage stage = Stage::Prefill;
  bool kv_cache = true;

  void check() const;
};

TransformerConfig opt_2_7b_preset();

/// Op/tensor ids of one SSM state-update block, used by the tiler to map
/// fusion schemes onto the graph.
struct SsmBlockInfo {
  int layer = 0;
  std::int64_t L = 1;
  // Bulk ops over all timesteps at once (L-tiled under fusion).
  int op_dA = -1, op_exp = -1, op_dB = -1, op_dbx = -1;
  // Trailing output assembly, fused per timestep under the deeper schemes.
  int op_dx = -1, op_y = -1;
  // Per-timestep chain ops, index t.
  std::vector<int> op_hmul, op_hadd, op_ch, op_ysum;
  // Tensors by role.
  int t_delta = -1, t_x = -1, t_B = -1, t_C = -1, t_A = -1, t_Dw = -1;
  int t_dA = -1, t_exp = -1, t_dB = -1, t_dbx = -1;
  std::vector<int> t_h;  // h_0 .. h_L (first is the block input state)
  std::vector<int> t_hmul, t_ch, t_ysum;
  int t_ycat = -1, t_dxout = -1, t_y = -1;
};

struct MambaModel {
  WorkloadGraph graph;
  MambaConfig cfg;
  std::vector<SsmBlockInfo> blocks;
};

/// Sequential state-update subgraph (bulk discretization followed by the
/// per-timestep h chain). Inputs are existing tensors of `g`.
SsmBlockInfo expand_ssm_operator(WorkloadGraph& g, const MambaConfig& cfg,
                                 int t_delta, int t_B, int t_C, int t_x,
                                 int t_A, int t_Dw, const std::string& prefix);

/// Single Mamba block: projections, depthwise conv, SiLU branches, the
/// state-update subgraph, gating, output projection, norm and residual.
MambaModel build_mamba_block(const MambaConfig& cfg);

/// Full model: n_layers chained blocks in one graph.
MambaModel build_mamba_model(const MambaConfig& cfg);

/// Analytical per-operator summary used by the roofline module: scalar ops
/// and off-chip bytes under the layer-by-layer execution convention.
struct OperatorDescriptor {
  std::string name;
  OpClass op_class = OpClass::Elementwise;
  std::int64_t ops = 0;
  std::int64_t read_bytes = 0;   // activations + weights, shaped reads
  std::int64_t write_bytes = 0;  // shaped writes
};

/// Whole-model descriptor list for the transformer (per paper's six classes;
/// attention includes softmax). Counts cover all layers.
std::vector<OperatorDescriptor> build_transformer_descriptor(const TransformerConfig& cfg);

/// Whole-model descriptor list derived from a workload graph. State-kind
/// tensors are exempt from byte accounting (the recurrent state stays in
/// dedicated on-chip storage); reads through broadcasts are charged at the
/// consumer's shaped extent.
std::vector<OperatorDescriptor> descriptors_from_graph(const WorkloadGraph& g);

}  // namespace ssmfusim
