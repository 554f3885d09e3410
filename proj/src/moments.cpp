#include "mret/moments.hpp"

#include <algorithm>
#include <cmath>

#include "mret/errors.hpp"

namespace mret {

namespace {

// Blocks below this fraction of scale^k are round-off, not signal.
constexpr double kZeroBlockTolerance = 1e-12;

std::vector<double> patch_means(const FeatureTensor& x) {
  const auto stride = x.frame_stride();
  std::vector<double> mean(stride, 0.0);
  for (std::size_t t = 0; t < x.frames; ++t) {
    const auto f = x.frame(t);
    for (std::size_t i = 0; i < stride; ++i) mean[i] += f[i];
  }
  const auto inv_t = 1.0 / static_cast<double>(x.frames);
  for (auto& m : mean) m *= inv_t;
  // Second pass removes the rounding error of the first, so constant
  // sequences reproduce their value exactly.
  std::vector<double> residual(stride, 0.0);
  for (std::size_t t = 0; t < x.frames; ++t) {
    const auto f = x.frame(t);
    for (std::size_t i = 0; i < stride; ++i) residual[i] += f[i] - mean[i];
  }
  for (std::size_t i = 0; i < stride; ++i) mean[i] += residual[i] * inv_t;
  return mean;
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

std::vector<PatchMoments> temporal_moments(const FeatureTensor& tensor, int max_order) {
  if (max_order < 1) throw ContractError("moment order must be >= 1");
  tensor.check();
  const auto stride = tensor.frame_stride();
  const auto orders = static_cast<std::size_t>(max_order);

  std::vector<PatchMoments> out(orders);
  for (std::size_t k = 0; k < orders; ++k) {
    out[k].order = static_cast<int>(k + 1);
    out[k].patches = tensor.patches;
    out[k].dim = tensor.dim;
  }
  out[0].values = patch_means(tensor);
  if (orders == 1) return out;

  const auto& mean = out[0].values;
  for (std::size_t k = 1; k < orders; ++k) out[k].values.assign(stride, 0.0);
  for (std::size_t t = 0; t < tensor.frames; ++t) {
    const auto f = tensor.frame(t);
    for (std::size_t i = 0; i < stride; ++i) {
      const double dev = f[i] - mean[i];
      double power = dev;
      for (std::size_t k = 1; k < orders; ++k) {
        power *= dev;
        out[k].values[i] += power;
      }
    }
  }
  const auto inv_t = 1.0 / static_cast<double>(tensor.frames);
  for (std::size_t k = 1; k < orders; ++k) {
    for (auto& v : out[k].values) v *= inv_t;
  }
  return out;
}

PatchMoments temporal_mean(const FeatureTensor& tensor) {
  return std::move(temporal_moments(tensor, 1).front());
}

PatchMoments central_moment(const FeatureTensor& tensor, int k) {
  if (k < 2) throw ContractError("central_moment needs k >= 2 (order 1 is temporal_mean)");
  return std::move(temporal_moments(tensor, k).back());
}

MomentDescriptor spatial_aggregate(const PatchMoments& moments) {
  if (moments.patches == 0 || moments.dim == 0 ||
      moments.values.size() != moments.patches * moments.dim) {
    throw ContractError("patch moments have inconsistent shape");
  }
  MomentDescriptor d;
  d.order = moments.order;
  d.vector.assign(moments.dim, 0.0);
  for (std::size_t p = 0; p < moments.patches; ++p) {
    const auto row = moments.row(p);
    for (std::size_t c = 0; c < moments.dim; ++c) d.vector[c] += row[c];
  }
  const auto inv_p = 1.0 / static_cast<double>(moments.patches);
  for (auto& v : d.vector) v *= inv_p;
  return d;
}

FeatureTensor temporal_difference(const FeatureTensor& tensor) {
  if (tensor.frames < 2) throw ContractError("patch_diff requires at least 2 frames");
  tensor.check();
  FeatureTensor out(tensor.video_id + "#diff", tensor.frames - 1, tensor.patches, tensor.dim);
  const auto stride = tensor.frame_stride();
  for (std::size_t t = 0; t + 1 < tensor.frames; ++t) {
    const auto a = tensor.frame(t);
    const auto b = tensor.frame(t + 1);
    auto o = out.frame(t);
    for (std::size_t i = 0; i < stride; ++i) o[i] = b[i] - a[i];
  }
  return out;
}

FeatureTensor frame_collapse(const FeatureTensor& tensor) {
  tensor.check();
  FeatureTensor out(tensor.video_id, tensor.frames, 1, tensor.dim);
  const auto inv_p = 1.0 / static_cast<double>(tensor.patches);
  for (std::size_t t = 0; t < tensor.frames; ++t) {
    auto o = out.frame(t);
    for (std::size_t p = 0; p < tensor.patches; ++p) {
      for (std::size_t c = 0; c < tensor.dim; ++c) o[c] += tensor.at(t, p, c);
    }
    for (auto& v : o) v *= inv_p;
  }
  return out;
}

FeatureTensor apply_level(const FeatureTensor& tensor, Level level) {
  switch (level) {
    case Level::kPatch: return tensor;
    case Level::kFrame: return frame_collapse(tensor);
    case Level::kPatchDiff: return temporal_difference(tensor);
  }
  return tensor;
}

MomentEmbedding compute_embedding(const FeatureTensor& tensor, const MomentConfig& config) {
  config.check();
  const FeatureTensor x = apply_level(tensor, config.level);
  const auto orders = config.orders();
  const auto dim = x.dim;
  const auto moments = temporal_moments(x, static_cast<int>(orders));
  const double scale = max_abs(x.data);

  std::vector<std::vector<double>> blocks;
  blocks.reserve(orders);
  for (std::size_t k = 0; k < orders; ++k) {
    auto block = spatial_aggregate(moments[k]).vector;
    const double norm = l2_norm(block);
    const double floor = kZeroBlockTolerance * std::pow(scale, static_cast<double>(k + 1)) *
                         std::sqrt(static_cast<double>(dim));
    if (norm <= floor) {
      std::fill(block.begin(), block.end(), 0.0);
    } else if (config.per_moment_normalize) {
      for (auto& v : block) v /= norm;
    }
    for (auto& v : block) v *= config.weights[k];
    blocks.push_back(std::move(block));
  }

  MomentEmbedding e;
  e.video_id = tensor.video_id;
  e.config_digest = config.digest();
  if (config.fusion == Fusion::kConcat) {
    e.vector.reserve(orders * dim);
    for (const auto& b : blocks) e.vector.insert(e.vector.end(), b.begin(), b.end());
  } else {
    e.vector.assign(dim, 0.0);
    for (const auto& b : blocks) {
      for (std::size_t c = 0; c < dim; ++c) e.vector[c] += b[c];
    }
  }
  const double norm = l2_norm(e.vector);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw DegenerateEmbeddingError(tensor.video_id);
  for (auto& v : e.vector) v /= norm;
  e.normalized = true;
  return e;
}

std::vector<std::size_t> uniform_frame_indices(std::size_t total, std::size_t count) {
  if (total == 0 || count == 0) throw ContractError("frame sampling needs total >= 1 and count >= 1");
  std::vector<std::size_t> idx(count);
  if (count == 1) {
    // round((T-1)/2), halves rounded up
    idx[0] = total / 2;
    return idx;
  }
  const auto span = total - 1;
  const auto denom = count - 1;
  for (std::size_t i = 0; i < count; ++i) {
    // round(i*span/denom) with halves rounded up, in exact integer arithmetic
    idx[i] = (2 * i * span + denom) / (2 * denom);
  }
  return idx;
}

FeatureTensor subsample_frames(const FeatureTensor& tensor, std::size_t count) {
  if (count > tensor.frames) {
    throw ContractError("video '" + tensor.video_id + "' has " + std::to_string(tensor.frames) +
                        " frames, cannot sample " + std::to_string(count));
  }
  const auto idx = uniform_frame_indices(tensor.frames, count);
  FeatureTensor out(tensor.video_id, count, tensor.patches, tensor.dim);
  for (std::size_t i = 0; i < count; ++i) {
    const auto src = tensor.frame(idx[i]);
    std::copy(src.begin(), src.end(), out.frame(i).begin());
  }
  return out;
}

}  // namespace mret
