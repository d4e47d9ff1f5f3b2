#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "ssmfusim/builders.hpp"
#include "ssmfusim/tracker.hpp"

namespace ssmfusim {

enum class SchemeName { UF, A, B, A_B, AS, BS, AS_B, BS_A, All, MA_All };

const char* to_string(SchemeName s);
SchemeName scheme_from_string(const std::string& s);

/// A fusion scheme: the set of state-update tensors kept on-chip and the
/// tiling applied to the fused operators.
struct FusionScheme {
  SchemeName name = SchemeName::UF;
  std::set<std::string> local_tensors;  // role names: dA, exp_dA, dB, dBx, h
  bool h_double = false;                // h kept as the (h_{t-1}, h_t) pair
  bool l_split = false;
  int d_split_factor = 1;

  bool is_local(const std::string& role) const { return local_tensors.count(role) > 0; }
};

/// Peak on-chip bytes of one fused state-update timestep: five (D,N) tensors
/// plus one (D,) slice.
std::int64_t required_bytes(std::int64_t D, std::int64_t N, int element_bits = 32);

/// Minimum D splits so one slice's working set fits on-chip. Throws
/// InfeasibleError when no split count (up to n = D) fits.
int compute_d_splits(std::int64_t D, std::int64_t N, int element_bits,
                     std::int64_t memory_bytes);

/// Table-driven scheme construction; MA_All derives its D split factor from
/// the memory capacity.
FusionScheme scheme(SchemeName name, const MambaConfig& cfg, std::int64_t memory_bytes);

struct SchemeRow {
  std::string full_name;
  std::string abbrev;
  std::string locals;
  std::string tiles_per_layer;
};
std::vector<SchemeRow> scheme_table();

/// One simulated tile: a whole op (t < 0) or one (d, t) slice of a fused op.
struct SimTile {
  int op = -1;
  std::int64_t t = -1;
  int d = 0;
  int n_d = 1;
  std::int64_t group = -1;  // tiles sharing a group overlap transfers/compute
  int layer = -1;
};

struct Schedule {
  std::vector<SimTile> tiles;
  FusionScheme scheme;
  // Tensors that may live solely inside a group without off-chip traffic
  // (working intermediates of the decomposed h update).
  std::set<int> transient_tensors;
  // Per-layer pins held for the duration of the layer's fused execution.
  struct LayerPins {
    int layer = -1;
    std::vector<int> tensors;  // A, Dw
    std::size_t first_tile = 0, last_tile = 0;
  };
  std::vector<LayerPins> pins;
  // Tiling per fused tensor id (for dependency validation and tile counts).
  TilingMap tiling;
};

/// Ordered tile schedule for a model under a scheme. Non-fused ops run whole
/// in topological order; fused ops are emitted per (d-slice, timestep).
Schedule generate_schedule(const MambaModel& model, const FusionScheme& scheme);

/// Number of schedule tiles producing each of the scheme's fused tensors,
/// keyed by role name (for Table-1 conformance checks).
std::map<std::string, std::int64_t> fused_tile_counts(const MambaModel& model,
                                                      const Schedule& s);

}  // namespace ssmfusim
