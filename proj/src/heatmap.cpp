#include "mret/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "mret/errors.hpp"
#include "mret/moment_config.hpp"

namespace mret {

HeatmapMatrix similarity_heatmap(std::span<const MomentEmbedding> embeddings) {
  if (embeddings.size() < 2) throw ContractError("heatmap needs at least two embeddings");
  for (const auto& e : embeddings) {
    if (e.config_digest != embeddings.front().config_digest) {
      throw ContractError("config digest mismatch: '" + e.video_id + "' has " + e.config_digest + ", expected " +
                          embeddings.front().config_digest);
    }
  }
  // build_index normalizes rows and rejects duplicate ids.
  return similarity_heatmap(build_index(embeddings));
}

HeatmapMatrix similarity_heatmap(const EmbeddingIndex& index) {
  const auto n = index.size();
  if (n < 2) throw ContractError("heatmap needs at least two embeddings");
  HeatmapMatrix h;
  h.ids = index.ids();
  h.values.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double s = cosine(index.row(i), index.row(j));
      h.values[i * n + j] = s;
      h.values[j * n + i] = s;
    }
  }
  return h;
}

void write_heatmap_csv(const HeatmapMatrix& heatmap, std::ostream& out) {
  out << "id";
  for (const auto& id : heatmap.ids) out << ',' << id;
  out << '\n';
  for (std::size_t i = 0; i < heatmap.size(); ++i) {
    out << heatmap.ids[i];
    for (std::size_t j = 0; j < heatmap.size(); ++j) out << ',' << format_number(heatmap.at(i, j));
    out << '\n';
  }
}

void write_heatmap_pgm(const HeatmapMatrix& heatmap, std::ostream& out, std::size_t cell_pixels) {
  cell_pixels = std::max<std::size_t>(cell_pixels, 1);
  const auto side = heatmap.size() * cell_pixels;
  out << "P5\n" << side << ' ' << side << "\n255\n";
  std::string row(side, '\0');
  for (std::size_t i = 0; i < heatmap.size(); ++i) {
    for (std::size_t j = 0; j < heatmap.size(); ++j) {
      const double v = std::clamp(heatmap.at(i, j), -1.0, 1.0);
      const auto grey = static_cast<unsigned char>(std::lround((v + 1.0) * 0.5 * 255.0));
      std::fill_n(row.begin() + static_cast<std::ptrdiff_t>(j * cell_pixels), cell_pixels, static_cast<char>(grey));
    }
    for (std::size_t r = 0; r < cell_pixels; ++r) out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

BlockContrast block_contrast(const HeatmapMatrix& heatmap, std::span<const std::size_t> group_of) {
  if (group_of.size() != heatmap.size()) throw ContractError("one group id per heatmap row is required");
  double within = 0.0, across = 0.0;
  std::size_t nw = 0, na = 0;
  for (std::size_t i = 0; i < heatmap.size(); ++i) {
    for (std::size_t j = 0; j < heatmap.size(); ++j) {
      if (i == j) continue;
      if (group_of[i] == group_of[j]) {
        within += heatmap.at(i, j);
        ++nw;
      } else {
        across += heatmap.at(i, j);
        ++na;
      }
    }
  }
  return {nw ? within / static_cast<double>(nw) : 0.0, na ? across / static_cast<double>(na) : 0.0};
}

}  // namespace mret
