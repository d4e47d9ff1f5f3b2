#pragma once

#include <string>
#include <vector>

#include "ssmfusim/dse.hpp"
#include "ssmfusim/roofline.hpp"
#include "ssmfusim/sim.hpp"

namespace ssmfusim {

// Workload JSON:
//   {"tensors":[{"id":0,"name":"x","dims":[["L",1024],["D",5120]],
//                "bits":32,"kind":"activation"}],
//    "ops":[{"id":0,"kind":"matmul","attrs":{},"inputs":[0,1],"output":2,
//            "class":"projection"}],
//    "stage":"prefill"}
// Tensor and op ids must be dense and ascending.
std::string workload_to_json(const WorkloadGraph& g);
WorkloadGraph workload_from_json(const std::string& text);

// Accelerator JSON: {"pe_count":8192,"clock_hz":1e9,"onchip_bytes":...,
//                    "offchip_gbps":256,"cpo":{"exp":4},"macs_per_pe_per_cycle":1}
std::string accel_to_json(const AcceleratorConfig& cfg);
AcceleratorConfig accel_from_json(const std::string& text);
/// Named preset ("marca") or a JSON file path.
AcceleratorConfig resolve_accel(const std::string& name_or_path);

// Model config JSON: {"model":"mamba","d_model":2560,"expand":2,"N":64,
//                     "dt_rank":160,"conv_kernel":4,"n_layers":64,
//                     "L":1024,"stage":"prefill"}
MambaConfig mamba_from_json(const std::string& text);
TransformerConfig transformer_from_json(const std::string& text);
/// Named preset ("mamba-2.8b") or a JSON file path.
MambaConfig resolve_mamba(const std::string& name_or_path, std::int64_t L, Stage stage);
TransformerConfig resolve_transformer(const std::string& name_or_path, std::int64_t L,
                                      Stage stage);

std::string report_to_json(const SimReport& r, const AcceleratorConfig& cfg);

// CSV emitters. Headers are part of the stable output schema.
std::string timeline_to_csv(const SimReport& r, const WorkloadGraph& g);
std::string roofline_to_csv(const std::vector<ComparisonRow>& rows);
std::string memory_sweep_to_csv(const std::vector<SweepPoint>& points,
                                const AcceleratorConfig& cfg);
std::string dse_to_csv(const DseResult& r, const AcceleratorConfig& anchor);
/// Gnuplot-ready contour blocks (blank line between iso-area groups).
std::string dse_to_contour(const DseResult& r);
std::string schemes_to_text();

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace ssmfusim
