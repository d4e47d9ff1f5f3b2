#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssmfusim/builders.hpp"
#include "ssmfusim/hw.hpp"

namespace ssmfusim {

/// Per-operator-class analytical profile under layer-by-layer execution.
struct ClassProfile {
  OpClass op_class = OpClass::Elementwise;
  std::int64_t ops = 0;
  std::int64_t dram_bytes = 0;
  double oi = 0;             // ops per byte
  double perf_ops_per_s = 0; // attainable (roofline) performance
  double latency_s = 0;
};

/// min(peak compute, bandwidth * OI).
double roofline_perf(double oi, const AcceleratorConfig& cfg);

std::vector<ClassProfile> profile_model(const std::vector<OperatorDescriptor>& descriptors,
                                        const AcceleratorConfig& cfg);

double total_latency_s(const std::vector<ClassProfile>& profiles);
OpClass dominant_class(const std::vector<ClassProfile>& profiles);

struct ComparisonRow {
  std::string model;
  Stage stage = Stage::Prefill;
  std::int64_t L = 0;
  std::vector<ClassProfile> profiles;
  double latency_s = 0;
  OpClass dominant = OpClass::Projection;
};

/// Layer-by-layer roofline latency for the transformer and the SSM across
/// sequence lengths at one stage.
std::vector<ComparisonRow> compare_models(const TransformerConfig& tf,
                                          const MambaConfig& ssm, Stage stage,
                                          const std::vector<std::int64_t>& lengths,
                                          const AcceleratorConfig& cfg);

/// Whole-model descriptors for the SSM at a given stage/length (one block
/// scaled by the layer count).
std::vector<OperatorDescriptor> mamba_descriptors(const MambaConfig& cfg);

}  // namespace ssmfusim
