#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ssmfusim/dse.hpp"
#include "ssmfusim/io.hpp"
#include "ssmfusim/roofline.hpp"
#include "ssmfusim/sim.hpp"

using namespace ssmfusim;

namespace {

int jobs_from_env() {
  const char* env = std::getenv("SSMFUSIM_JOBS");
  if (!env) return 1;
  int j = std::atoi(env);
  return j > 0 ? j : 1;
}

void emit(const std::string& out, const std::string& content) {
  if (out.empty() || out == "-")
    std::cout << content;
  else
    write_file(out, content);
}

std::vector<std::int64_t> parse_i64_list(const std::string& s) {
  std::vector<std::int64_t> v;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      if (!cur.empty()) v.push_back(std::stoll(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  return v;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> v;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      if (!cur.empty()) v.push_back(std::stod(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ssmfusim: fusion-aware SSM accelerator performance simulator"};
  app.require_subcommand(1);

  // roofline
  auto* roof = app.add_subcommand("roofline", "layer-by-layer roofline comparison CSV");
  std::string r_accel = "marca", r_tf = "opt-2.7b", r_ssm = "mamba-2.8b";
  std::string r_stage = "prefill", r_out;
  std::string r_lengths = "64,512,1024,2048";
  roof->add_option("--accel", r_accel, "accelerator preset or JSON path");
  roof->add_option("--transformer", r_tf, "transformer preset or JSON path");
  roof->add_option("--ssm", r_ssm, "SSM preset or JSON path");
  roof->add_option("--stage", r_stage, "prefill | decode | both");
  roof->add_option("--L", r_lengths, "comma-separated sequence lengths");
  roof->add_option("--out", r_out, "output CSV path (default stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate one model/scheme/accelerator");
  std::string s_model = "mamba-2.8b", s_scheme = "all", s_accel = "marca";
  std::string s_stage = "prefill", s_out, s_timeline;
  std::int64_t s_L = 1024;
  int s_layers = 0;
  sim->add_option("--model", s_model, "model preset or config JSON path");
  sim->add_option("--scheme", s_scheme, "fusion scheme (uf,a,b,a-b,as,bs,as-b,bs-a,all,ma-all)");
  sim->add_option("--accel", s_accel, "accelerator preset or JSON path");
  sim->add_option("--L", s_L, "sequence length");
  sim->add_option("--stage", s_stage, "prefill | decode");
  sim->add_option("--layers", s_layers, "override layer count");
  sim->add_option("--out", s_out, "SimReport JSON path (default stdout)");
  sim->add_option("--timeline", s_timeline, "optional timeline CSV path");

  // sweep-mem
  auto* sweep = app.add_subcommand("sweep-mem", "latency vs on-chip capacity CSV");
  std::string w_model = "mamba-2.8b", w_scheme = "all", w_accel = "marca";
  std::string w_stage = "prefill", w_out, w_caps;
  std::int64_t w_L = 1024;
  int w_layers = 0;
  sweep->add_option("--model", w_model, "model preset or config JSON path");
  sweep->add_option("--scheme", w_scheme, "fusion scheme");
  sweep->add_option("--accel", w_accel, "accelerator preset or JSON path");
  sweep->add_option("--L", w_L, "sequence length");
  sweep->add_option("--stage", w_stage, "prefill | decode");
  sweep->add_option("--layers", w_layers, "override layer count");
  sweep->add_option("--capacities", w_caps, "comma-separated capacities in bytes, descending")
      ->required();
  sweep->add_option("--out", w_out, "output CSV path (default stdout)");

  // dse
  auto* dse = app.add_subcommand("dse", "area x memory-fraction design space sweep");
  std::string d_model = "mamba-2.8b", d_scheme = "ma-all", d_stage = "prefill";
  std::string d_out, d_contour, d_area_fracs, d_mem_fracs;
  std::int64_t d_L = 1024;
  int d_layers = 0, d_jobs = 0;
  std::int64_t d_calib_pes = 0;
  double d_calib_mib = 0;
  dse->add_option("--model", d_model, "model preset or config JSON path");
  dse->add_option("--scheme", d_scheme, "fusion scheme");
  dse->add_option("--L", d_L, "sequence length");
  dse->add_option("--stage", d_stage, "prefill | decode");
  dse->add_option("--layers", d_layers, "override layer count");
  dse->add_option("--area-fracs", d_area_fracs, "comma-separated area fractions (0,1.25]");
  dse->add_option("--mem-fracs", d_mem_fracs, "comma-separated memory fractions [0,1]");
  dse->add_option("--jobs", d_jobs, "parallel point evaluations (SSMFUSIM_JOBS fallback)");
  dse->add_option("--calibrate-pes", d_calib_pes,
                  "calibrate area coefficients so this PE count ...");
  dse->add_option("--calibrate-mib", d_calib_mib,
                  "... with this many MiB shares the anchor area");
  dse->add_option("--out", d_out, "output CSV path (default stdout)");
  dse->add_option("--contour", d_contour, "gnuplot-ready contour data path");

  // schemes
  auto* sch = app.add_subcommand("schemes", "list the fusion schemes");
  std::string c_out;
  sch->add_option("--out", c_out, "output path (default stdout)");

  // emit-workload
  auto* emitw = app.add_subcommand("emit-workload", "write the workload graph JSON");
  std::string e_model = "mamba-2.8b", e_stage = "prefill", e_out;
  std::int64_t e_L = 16;
  int e_layers = 1;
  emitw->add_option("--model", e_model, "model preset or config JSON path");
  emitw->add_option("--L", e_L, "sequence length");
  emitw->add_option("--stage", e_stage, "prefill | decode");
  emitw->add_option("--layers", e_layers, "layer count to emit");
  emitw->add_option("--out", e_out, "output JSON path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*roof) {
      AcceleratorConfig cfg = resolve_accel(r_accel);
      std::vector<ComparisonRow> rows;
      std::vector<std::string> stages =
          r_stage == "both" ? std::vector<std::string>{"prefill", "decode"}
                            : std::vector<std::string>{r_stage};
      for (const auto& st : stages) {
        Stage stage = stage_from_string(st);
        TransformerConfig tf = resolve_transformer(r_tf, 0, stage);
        MambaConfig ssm = resolve_mamba(r_ssm, 0, stage);
        auto part = compare_models(tf, ssm, stage, parse_i64_list(r_lengths), cfg);
        rows.insert(rows.end(), part.begin(), part.end());
      }
      emit(r_out, roofline_to_csv(rows));
    } else if (*sim) {
      Stage stage = stage_from_string(s_stage);
      if (s_L < 1) throw ConfigError("L must be >= 1");
      MambaConfig mc = resolve_mamba(s_model, s_L, stage);
      if (s_layers > 0) mc.n_layers = s_layers;
      AcceleratorConfig cfg = resolve_accel(s_accel);
      MambaModel model = build_mamba_model(mc);
      SimOptions opts;
      opts.keep_timeline = !s_timeline.empty();
      FusionScheme fs = scheme(scheme_from_string(s_scheme), mc, cfg.onchip_bytes);
      Schedule sched = generate_schedule(model, fs);
      SimReport rep = simulate(sched, model, cfg, opts);
      emit(s_out, report_to_json(rep, cfg));
      if (!s_timeline.empty()) write_file(s_timeline, timeline_to_csv(rep, model.graph));
    } else if (*sweep) {
      Stage stage = stage_from_string(w_stage);
      if (w_L < 1) throw ConfigError("L must be >= 1");
      MambaConfig mc = resolve_mamba(w_model, w_L, stage);
      if (w_layers > 0) mc.n_layers = w_layers;
      AcceleratorConfig cfg = resolve_accel(w_accel);
      MambaModel model = build_mamba_model(mc);
      auto caps = parse_i64_list(w_caps);
      for (size_t i = 1; i < caps.size(); ++i)
        if (caps[i] > caps[i - 1]) throw ConfigError("capacities must be sorted descending");
      auto points = memory_sweep(model, scheme_from_string(w_scheme), cfg, caps);
      emit(w_out, memory_sweep_to_csv(points, cfg));
    } else if (*dse) {
      Stage stage = stage_from_string(d_stage);
      if (d_L < 1) throw ConfigError("L must be >= 1");
      MambaConfig mc = resolve_mamba(d_model, d_L, stage);
      if (d_layers > 0) mc.n_layers = d_layers;
      MambaModel model = build_mamba_model(mc);
      AreaModel am = default_area_model();
      if (d_calib_pes > 0 && d_calib_mib > 0) {
        AcceleratorConfig marca = marca_preset();
        am = calibrate_area_model(marca.pe_count, marca.onchip_bytes, d_calib_pes,
                                  static_cast<std::int64_t>(d_calib_mib * 1048576.0));
      }
      auto areas = d_area_fracs.empty() ? default_area_fractions()
                                        : parse_double_list(d_area_fracs);
      auto mems = d_mem_fracs.empty() ? default_mem_fractions()
                                      : parse_double_list(d_mem_fracs);
      int jobs = d_jobs > 0 ? d_jobs : jobs_from_env();
      DseResult res = dse_sweep(model, scheme_from_string(d_scheme), am, areas, mems, jobs);
      emit(d_out, dse_to_csv(res, marca_preset()));
      if (!d_contour.empty()) write_file(d_contour, dse_to_contour(res));
    } else if (*sch) {
      emit(c_out, schemes_to_text());
    } else if (*emitw) {
      Stage stage = stage_from_string(e_stage);
      if (e_L < 1) throw ConfigError("L must be >= 1");
      MambaConfig mc = resolve_mamba(e_model, e_L, stage);
      mc.n_layers = e_layers > 0 ? e_layers : 1;
      MambaModel model = build_mamba_model(mc);
      emit(e_out, workload_to_json(model.graph));
    }
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
