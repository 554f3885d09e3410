#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mret/moments.hpp"
#include "mret/retrieval.hpp"

namespace mret {

/// Pairwise cosine similarities, row-major N x N.
struct HeatmapMatrix {
  std::vector<std::string> ids;
  std::vector<double> values;

  std::size_t size() const noexcept { return ids.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * ids.size() + j]; }
};

/// Needs >= 2 embeddings sharing one config digest.
HeatmapMatrix similarity_heatmap(std::span<const MomentEmbedding> embeddings);
HeatmapMatrix similarity_heatmap(const EmbeddingIndex& index);

void write_heatmap_csv(const HeatmapMatrix& heatmap, std::ostream& out);

/// Binary 8-bit PGM; similarity -1 maps to black and +1 to white.
void write_heatmap_pgm(const HeatmapMatrix& heatmap, std::ostream& out, std::size_t cell_pixels = 8);

/// Mean off-diagonal similarity within and across the given groups (one
/// group id per row).
struct BlockContrast {
  double within = 0.0;
  double across = 0.0;
};
BlockContrast block_contrast(const HeatmapMatrix& heatmap, std::span<const std::size_t> group_of);

}  // namespace mret
