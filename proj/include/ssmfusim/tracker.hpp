#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ssmfusim/graph.hpp"

namespace ssmfusim {

/// One tile of an op's output: the op id plus a flat index over the op's
/// output tile grid (row-major over split dims).
struct TileKey {
  int op = -1;
  std::int64_t flat = 0;
  auto operator<=>(const TileKey&) const = default;
};

using CellSet = std::vector<TileKey>;  // sorted, deduplicated

/// Split counts per dimension label; absent labels are unsplit.
using DimSplits = std::map<std::string, int>;
/// Tiling per tensor id.
using TilingMap = std::map<int, DimSplits>;

/// Ceil-partition boundaries: tile i covers [i*ceil(E/k), ...); the last tile
/// takes the remainder.
std::pair<std::int64_t, std::int64_t> tile_range(std::int64_t extent, int splits, int idx);
int tile_index_of(std::int64_t element, std::int64_t extent, int splits);

/// Per-element producing-tile sets over a tensor, with dimensions that carry
/// no variation tracked symbolically (collapsed).
struct ProducerMap {
  int tensor = -1;
  std::vector<Dim> dims;
  std::vector<bool> collapsed;
  std::vector<CellSet> cells;  // row-major over uncollapsed dims

  std::int64_t uncollapsed_volume() const;
  /// Cell lookup by full element index (collapsed dims ignored).
  const CellSet& at(const std::vector<std::int64_t>& idx) const;
  /// Force a dim to per-element representation.
  void expand_dim(int dim_pos);
};

/// cells = id of the covering output tile of `producer_op`; unsplit dims are
/// collapsed. Throws if splits reference absent dims or the uncollapsed
/// element count exceeds the tracking guard.
ProducerMap init_map(const TensorSpec& t, const DimSplits& splits, int producer_op);

/// Map with no producing tiles (graph inputs).
ProducerMap empty_map(const TensorSpec& t);

/// Push producer maps through one operator. Movement ops reindex; compute
/// ops union the contributing cells (reductions and matmuls are many-to-one).
ProducerMap propagate(const OpNode& op, const WorkloadGraph& g,
                      const std::vector<const ProducerMap*>& inputs);

struct TileDep {
  TileKey consumer;
  TileKey producer;
  auto operator<=>(const TileDep&) const = default;
};

/// Exact consumer-tile -> producer-tile edges for every compute op under the
/// given tilings. Movement ops are traced through; graph inputs contribute no
/// edges.
std::set<TileDep> infer_tile_deps(const WorkloadGraph& g, const TilingMap& tiling);

/// Producer maps for every tensor (exposed for tests and debugging).
std::map<int, ProducerMap> build_producer_maps(const WorkloadGraph& g,
                                               const TilingMap& tiling);

/// DOT-format dump of a tile dependency graph.
std::string tile_deps_to_dot(const WorkloadGraph& g, const std::set<TileDep>& deps);

}  // namespace ssmfusim
