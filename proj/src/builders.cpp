#include "ssmfusim/builders.hpp"

#include <sstream>

namespace ssmfusim {

void MambaConfig::check() const {
  if (d_model < 1 || expand < 1 || n_state < 1 || dt_rank < 1 || conv_kernel < 1 ||
      n_layers < 1)
    throw ConfigError("mamba config fields must be >= 1");
  if (L < 1) throw ConfigError("L must be >= 1");
  if (stage == Stage::Decode && L != 1)
    throw ConfigError("decode stage runs with L = 1");
}

MambaConfig mamba_2_8b_preset() { return MambaConfig{}; }

void TransformerConfig::check() const {
  if (d_model < 1 || n_heads < 1 || d_ff < 1 || n_layers < 1)
    throw ConfigError("transformer config fields must be >= 1");
  if (d_model % n_heads != 0) throw ConfigError("d_model must divide by n_heads");
  if (L < 1) throw ConfigError("L must be >= 1");
}

TransformerConfig opt_2_7b_preset() { return TransformerConfig{}; }

SsmBlockInfo expand_ssm_operator(WorkloadGraph& g, const MambaConfig& cfg,
                                 int t_delta, int t_B, int t_C, int t_x,
                                 int t_A, int t_Dw, const std::string& prefix) {
  const std::int64_t L = g.tensor(t_delta).dims[0].extent;
  const std::int64_t D = cfg.d_inner();
  const std::int64_t N = cfg.n_state;
  SsmBlockInfo b;
  b.L = L;
  b.t_delta = t_delta;
  b.t_x = t_x;
  b.t_B = t_B;
  b.t_C = t_C;
  b.t_A = t_A;
  b.t_Dw = t_Dw;

  auto nm = [&](const std::string& s) { return prefix + s; };
  const std::vector<Dim> ldn{{"L", L}, {"D", D}, {"N", N}};

  // Bulk discretization over all timesteps at once.
  b.t_dA = g.add_tensor(nm("dA"), ldn);
  b.op_dA = g.add_op(OpKind::OuterProduct, OpClass::StateUpdate, {t_delta, t_A}, b.t_dA);
  b.t_exp = g.add_tensor(nm("exp_dA"), ldn);
  b.op_exp = g.add_op(OpKind::Exp, OpClass::StateUpdate, {b.t_dA}, b.t_exp);
  b.t_dB = g.add_tensor(nm("dB"), ldn);
  b.op_dB = g.add_op(OpKind::OuterProduct, OpClass::StateUpdate, {t_delta, t_B}, b.t_dB);
  int t_xbc = g.add_tensor(nm("x_bc"), ldn);
  OpAttrs bc;
  bc.out_dims = ldn;
  g.add_op(OpKind::Reshape, OpClass::StateUpdate, {t_x}, t_xbc, bc);
  b.t_dbx = g.add_tensor(nm("dBx"), ldn);
  b.op_dbx = g.add_op(OpKind::EwMul, OpClass::StateUpdate, {b.t_dB, t_xbc}, b.t_dbx);

  // Sequential h chain: one slice of exp(dA) and dBx per timestep.
  const std::vector<Dim> dn{{"D", D}, {"N", N}};
  int h_prev = g.add_tensor(nm("h0"), dn, TensorKind::State);
  b.t_h.push_back(h_prev);
  std::vector<int> ysum_ids;
  for (std::int64_t t = 0; t < L; ++t) {
    std::string ts = std::to_string(t);
    OpAttrs sl;
    sl.axis = 0;
    sl.index = t;
    int sE = g.add_tensor(nm("exp_dA.t") + ts, dn);
    g.add_op(OpKind::Slice, OpClass::StateUpdate, {b.t_exp}, sE, sl);
    int sX = g.add_tensor(nm("dBx.t") + ts, dn);
    g.add_op(OpKind::Slice, OpClass::StateUpdate, {b.t_dbx}, sX, sl);

    int hm = g.add_tensor(nm("h_mul.t") + ts, dn);
    b.op_hmul.push_back(g.add_op(OpKind::EwMul, OpClass::StateUpdate, {sE, h_prev}, hm));
    b.t_hmul.push_back(hm);
    int h = g.add_tensor(nm("h.t") + ts, dn, TensorKind::State);
    b.op_hadd.push_back(g.add_op(OpKind::EwAdd, OpClass::StateUpdate, {hm, sX}, h));
    b.t_h.push_back(h);

    int sC = g.add_tensor(nm("C.t") + ts, {{"N", N}});
    g.add_op(OpKind::Slice, OpClass::StateUpdate, {t_C}, sC, sl);
    int sCb = g.add_tensor(nm("C_bc.t") + ts, dn);
    OpAttrs cb;
    cb.out_dims = dn;
    g.add_op(OpKind::Reshape, OpClass::StateUpdate, {sC}, sCb, cb);
    int ch = g.add_tensor(nm("Ch.t") + ts, dn);
    b.op_ch.push_back(g.add_op(OpKind::EwMul, OpClass::StateUpdate, {sCb, h}, ch));
    b.t_ch.push_back(ch);

    OpAttrs rs;
    rs.axis = 1;
    int ys = g.add_tensor(nm("y_sum.t") + ts, {{"D", D}});
    b.op_ysum.push_back(g.add_op(OpKind::ReduceSum, OpClass::StateUpdate, {ch}, ys, rs));
    b.t_ysum.push_back(ys);
    ysum_ids.push_back(ys);
    h_prev = h;
  }

  // y = concat(y_sum) + Dw (.) x, assembled along L.
  OpAttrs cat;
  cat.axis = 0;
  std::vector<int> cat_in;
  // Concat over (1,D) views of the per-timestep sums.
  for (std::int64_t t = 0; t < L; ++t) {
    OpAttrs r1;
    r1.out_dims = {{"L", 1}, {"D", D}};
    int v = g.add_tensor(nm("y_row.t") + std::to_string(t), {{"L", 1}, {"D", D}});
    g.add_op(OpKind::Reshape, OpClass::StateUpdate, {ysum_ids[t]}, v, r1);
    cat_in.push_back(v);
  }
  b.t_ycat = g.add_tensor(nm("y_cat"), {{"L", L}, {"D", D}});
  g.add_op(OpKind::Concat, OpClass::StateUpdate, cat_in, b.t_ycat, cat);

  int t_dbc = g.add_tensor(nm("D_bc"), {{"L", L}, {"D", D}});
  OpAttrs dbc;
  dbc.out_dims = {{"L", L}, {"D", D}};
  g.add_op(OpKind::Reshape, OpClass::StateUpdate, {t_Dw}, t_dbc, dbc);
  b.t_dxout = g.add_tensor(nm("Dx"), {{"L", L}, {"D", D}});
  b.op_dx = g.add_op(OpKind::EwMul, OpClass::StateUpdate, {t_dbc, t_x}, b.t_dxout);
  b.t_y = g.add_tensor(nm("y"), {{"L", L}, {"D", D}});
  b.op_y = g.add_op(OpKind::EwAdd, OpClass::StateUpdate, {b.t_ycat, b.t_dxout}, b.t_y);
  return b;
}

static int append_mamba_block(WorkloadGraph& g, const MambaConfig& cfg, int layer,
                              int t_in, std::vector<SsmBlockInfo>& blocks) {
  const std::int64_t L = cfg.stage == Stage::Decode ? 1 : cfg.L;
  const std::int64_t dm = cfg.d_model;
  const std::int64_t D = cfg.d_inner();
  const std::int64_t N = cfg.n_state;
  const std::int64_t R = cfg.dt_rank;
  std::ostringstream p;
  p << "blk" << layer << ".";
  auto nm = [&](const std::string& s) { return p.str() + s; };

  const std::vector<Dim> l_dm{{"L", L}, {"Dmodel", dm}};
  const std::vector<Dim> l_d{{"L", L}, {"D", D}};

  int w_norm = g.add_tensor(nm("norm_w"), {{"Dmodel", dm}}, TensorKind::Weight);
  int t_norm = g.add_tensor(nm("norm"), l_dm);
  g.add_op(OpKind::RMSNorm, OpClass::Normalization, {t_in, w_norm}, t_norm);

  int w_inx = g.add_tensor(nm("in_proj_x_w"), {{"Dmodel", dm}, {"D", D}}, TensorKind::Weight);
  int t_x0 = g.add_tensor(nm("x0"), l_d);
  g.add_op(OpKind::MatMul, OpClass::Projection, {t_norm, w_inx}, t_x0);
  int w_inz = g.add_tensor(nm("in_proj_z_w"), {{"Dmodel", dm}, {"D", D}}, TensorKind::Weight);
  int t_z = g.add_tensor(nm("z"), l_d);
  g.add_op(OpKind::MatMul, OpClass::Projection, {t_norm, w_inz}, t_z);

  int w_conv = g.add_tensor(nm("conv_w"), {{"D", D}, {"K", cfg.conv_kernel}}, TensorKind::Weight);
  int t_conv = g.add_tensor(nm("conv"), l_d);
  OpAttrs ck;
  ck.kernel = cfg.conv_kernel;
  g.add_op(OpKind::Conv1dDepthwise, OpClass::Elementwise, {t_x0, w_conv}, t_conv, ck);
  int t_x = g.add_tensor(nm("x"), l_d);
  g.add_op(OpKind::SiLU, OpClass::Activation, {t_conv}, t_x);

  int w_xproj = g.add_tensor(nm("x_proj_w"), {{"D", D}, {"P", R + 2 * N}}, TensorKind::Weight);
  int t_xdbl = g.add_tensor(nm("x_dbl"), {{"L", L}, {"P", R + 2 * N}});
  g.add_op(OpKind::MatMul, OpClass::Projection, {t_x, w_xproj}, t_xdbl);

  auto split_part = [&](int part, const std::string& name, std::int64_t width,
                        const std::string& label) {
    OpAttrs sp;
    sp.axis = 1;
    sp.parts = {R, N, N};
    sp.part = part;
    int t = g.add_tensor(nm(name), {{"L", L}, {label, width}});
    g.add_op(OpKind::Split, OpClass::StateUpdate, {t_xdbl}, t, sp);
    return t;
  };
  int t_draw = split_part(0, "delta_raw", R, "R");
  int t_B = split_part(1, "B", N, "N");
  int t_C = split_part(2, "C", N, "N");

  int w_dt = g.add_tensor(nm("dt_proj_w"), {{"R", R}, {"D", D}}, TensorKind::Weight);
  int t_dt = g.add_tensor(nm("dt"), l_d);
  g.add_op(OpKind::MatMul, OpClass::Projection, {t_draw, w_dt}, t_dt);
  int t_delta = g.add_tensor(nm("delta"), l_d);
  g.add_op(OpKind::SoftPlus, OpClass::Activation, {t_dt}, t_delta);

  int t_A = g.add_tensor(nm("A"), {{"D", D}, {"N", N}}, TensorKind::Weight);
  int t_Dw = g.add_tensor(nm("Dw"), {{"D", D}}, TensorKind::Weight);

  SsmBlockInfo b = expand_ssm_operator(g, cfg, t_delta, t_B, t_C, t_x, t_A, t_Dw, p.str());
  b.layer = layer;

  int t_zs = g.add_tensor(nm("z_silu"), l_d);
  g.add_op(OpKind::SiLU, OpClass::Activation, {t_z}, t_zs);
  int t_gate = g.add_tensor(nm("gated"), l_d);
  g.add_op(OpKind::EwMul, OpClass::Elementwise, {b.t_y, t_zs}, t_gate);

  int w_out = g.add_tensor(nm("out_proj_w"), {{"D", D}, {"Dmodel", dm}}, TensorKind::Weight);
  int t_out = g.add_tensor(nm("proj_out"), l_dm);
  g.add_op(OpKind::MatMul, OpClass::Projection, {t_gate, w_out}, t_out);

  int t_res = g.add_tensor(nm("res"), l_dm);
  g.add_op(OpKind::EwAdd, OpClass::Elementwise, {t_in, t_out}, t_res);

  blocks.push_back(std::move(b));
  return t_res;
}

MambaModel build_mamba_block(const MambaConfig& cfg) {
  cfg.check();
  MambaModel m;
  m.cfg = cfg;
  const std::int64_t L = cfg.stage == Stage::Decode ? 1 : cfg.L;
  m.graph.stage = cfg.stage;
  int t_in = m.graph.add_tensor("blk0.in", {{"L", L}, {"Dmodel", cfg.d_model}});
  append_mamba_block(m.graph, cfg, 0, t_in, m.blocks);
  return m;
}

MambaModel build_mamba_model(const MambaConfig& cfg) {
  cfg.check();
  MambaModel m;
  m.cfg = cfg;
  const std::int64_t L = cfg.stage == Stage::Decode ? 1 : cfg.L;
  m.graph.stage = cfg.stage;
  int t = m.graph.add_tensor("blk0.in", {{"L", L}, {"Dmodel", cfg.d_model}});
  for (int layer = 0; layer < cfg.n_layers; ++layer)
    t = append_mamba_block(m.graph, cfg, layer, t, m.blocks);
  return m;
}

// ---------------------------------------------------------------------------
// Transformer descriptors

std::vector<OperatorDescriptor> build_transformer_descriptor(const TransformerConfig& cfg) {
  cfg.check();
  const std::int64_t L = cfg.L;
  const std::int64_t dm = cfg.d_model;
  const std::int64_t dff = cfg.d_ff;
  const std::int64_t H = cfg.n_heads;
  const std::int64_t eb = 4;  // 32-bit
  const bool decode = cfg.stage == Stage::Decode;
  const std::int64_t Lq = decode ? 1 : L;   // query rows processed per pass
  const std::int64_t Lk = L;                // keys visible to attention

  std::vector<OperatorDescriptor> ds;
  auto proj = [&](const std::string& name, std::int64_t rows, std::int64_t k,
                  std::int64_t cols) {
    OperatorDescriptor d;
    d.name = name;
    d.op_class = OpClass::Projection;
    d.ops = 2 * rows * k * cols;
    d.read_bytes = (rows * k + k * cols) * eb;
    d.write_bytes = rows * cols * eb;
    return d;
  };

  ds.push_back(proj("q_proj", Lq, dm, dm));
  ds.push_back(proj("k_proj", Lq, dm, dm));
  ds.push_back(proj("v_proj", Lq, dm, dm));
  ds.push_back(proj("attn_out_proj", Lq, dm, dm));
  ds.push_back(proj("ffn_up", Lq, dm, dff));
  ds.push_back(proj("ffn_down", Lq, dff, dm));

  {
    OperatorDescriptor qk;
    qk.name = "attn_qkT";
    qk.op_class = OpClass::Attention;
    qk.ops = 2 * Lq * Lk * dm;
    qk.read_bytes = (Lq * dm + Lk * dm) * eb;  // decode reads the K cache
    qk.write_bytes = H * Lq * Lk * eb;
    ds.push_back(qk);

    OperatorDescriptor sm;
    sm.name = "attn_softmax";
    sm.op_class = OpClass::Attention;
    sm.ops = 5 * H * Lq * Lk;
    sm.read_bytes = H * Lq * Lk * eb;
    sm.write_bytes = H * Lq * Lk * eb;
    ds.push_back(sm);

    OperatorDescriptor av;
    av.name = "attn_av";
    av.op_class = OpClass::Attention;
    av.ops = 2 * Lq * Lk * dm;
    av.read_bytes = (H * Lq * Lk + Lk * dm) * eb;
    av.write_bytes = Lq * dm * eb;
    ds.push_back(av);
  }

  for (const char* n : {"norm_attn", "norm_ffn"}) {
    OperatorDescriptor d;
    d.name = n;
    d.op_class = OpClass::Normalization;
    d.ops = 4 * Lq * dm;
    d.read_bytes = (Lq * dm + dm) * eb;
    d.write_bytes = Lq * dm * eb;
    ds.push_back(d);
  }

  {
    OperatorDescriptor act;
    act.name = "ffn_act";
    act.op_class = OpClass::Activation;
    act.ops = Lq * dff;
    act.read_bytes = Lq * dff * eb;
    act.write_bytes = Lq * dff * eb;
    ds.push_back(act);
  }

  for (const char* n : {"resid_attn", "resid_ffn"}) {
    OperatorDescriptor d;
    d.name = n;
    d.op_class = OpClass::Elementwise;
    d.ops = Lq * dm;
    d.read_bytes = 2 * Lq * dm * eb;
    d.write_bytes = Lq * dm * eb;
    ds.push_back(d);
  }

  for (auto& d : ds) {
    d.ops *= cfg.n_layers;
    d.read_bytes *= cfg.n_layers;
    d.write_bytes *= cfg.n_layers;
  }
  return ds;
}

std::vector<OperatorDescriptor> descriptors_from_graph(const WorkloadGraph& g) {
  std::vector<OperatorDescriptor> ds;
  for (int id : topo_order(g)) {
    const OpNode& n = g.op(id);
    if (is_data_movement(n.kind)) continue;
    OperatorDescriptor d;
    const TensorSpec& out = g.tensor(n.output);
    d.name = out.name;
    d.op_class = n.op_class;
    d.ops = op_count(n, g);
    for (int in : n.inputs) {
      const TensorSpec& t = g.tensor(in);
      // Reads through movement chains reaching state tensors are exempt too:
      // charge at the op's shaped input unless the underlying data is state.
      auto phys = trace_physical_reads(g, in, Region::full(t));
      bool state_backed = !phys.empty();
      for (const auto& pr : phys)
        if (g.tensor(pr.tensor_id).kind != TensorKind::State) state_backed = false;
      if (state_backed) continue;
      d.read_bytes += t.elements() * t.element_bits / 8;
    }
    if (out.kind != TensorKind::State) d.write_bytes = tensor_bytes(out);
    ds.push_back(d);
  }
  return ds;
}

}  // namespace ssmfusim
