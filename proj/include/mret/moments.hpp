#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mret/feature_tensor.hpp"
#include "mret/moment_config.hpp"

namespace mret {

/// Order-k temporal moment of every patch: P x d, row-major.
struct PatchMoments {
  int order = 1;
  std::size_t patches = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t p) const {
    return std::span<const double>(values).subspan(p * dim, dim);
  }
};

/// Spatial mean of one PatchMoments block.
struct MomentDescriptor {
  int order = 1;
  std::vector<double> vector;
};

struct MomentEmbedding {
  std::string video_id;
  std::vector<double> vector;
  std::string config_digest;
  bool normalized = false;
};

/// Per-patch temporal mean (order 1, non-central).
PatchMoments temporal_mean(const FeatureTensor& tensor);

/// Central temporal moment of order k >= 2, computed in two passes.
PatchMoments central_moment(const FeatureTensor& tensor, int k);

/// Orders 1..K in one sweep over the data; element k-1 holds order k.
std::vector<PatchMoments> temporal_moments(const FeatureTensor& tensor, int max_order);

MomentDescriptor spatial_aggregate(const PatchMoments& moments);

/// (T-1, P, d) tensor of forward differences; id gets a `#diff` suffix.
FeatureTensor temporal_difference(const FeatureTensor& tensor);

/// (T, 1, d) tensor holding the per-frame patch mean.
FeatureTensor frame_collapse(const FeatureTensor& tensor);

/// Applies the level transform of `level` (identity for patch).
FeatureTensor apply_level(const FeatureTensor& tensor, Level level);

/// Full pipeline: level transform, descriptors 1..K, optional per-block
/// normalization, weighting, fusion, final L2 normalization.
/// Throws DegenerateEmbeddingError when the fused vector is zero.
MomentEmbedding compute_embedding(const FeatureTensor& tensor, const MomentConfig& config);

/// Keeps `count` frames at round(i*(T-1)/(count-1)); count == 1 keeps the middle frame.
std::vector<std::size_t> uniform_frame_indices(std::size_t total, std::size_t count);

/// Copies the frames picked by uniform_frame_indices. Throws ContractError if count > T.
FeatureTensor subsample_frames(const FeatureTensor& tensor, std::size_t count);

}  // namespace mret
