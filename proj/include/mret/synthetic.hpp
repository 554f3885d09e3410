#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mret/feature_tensor.hpp"
#include "mret/manifest.hpp"

namespace mret {

enum class SyntheticLayout {
  /// Per group: a reference, a motion-sharing positive with different
  /// appearance, and per_group - 2 hard negatives that copy the reference's
  /// appearance but each move differently.
  kTriplet,
  /// Per group (= class): per_group videos sharing one motion; appearance
  /// styles are shared across classes.
  kLabeled,
};

/// Planted-signal dataset parameters. Every feature is
///   appearance_confound * appearance[p] + motion_signal * mask[p] * a_m * w_m(t) + noise * N(0,1)
/// where a_m is a per-motion channel profile and w_m a skewed periodic
/// waveform with 1 or 2 cycles per clip.
struct SyntheticSpec {
  std::uint64_t seed = 7;
  std::size_t groups = 20;
  std::size_t per_group = 5;
  std::size_t frames = 32;
  std::size_t patches = 16;
  std::size_t dim = 32;
  double appearance_confound = 1.0;
  double motion_signal = 1.0;
  double noise = 0.1;
  /// Labeled layout only: number of appearance styles shared across classes.
  std::size_t styles = 3;
  SyntheticLayout layout = SyntheticLayout::kTriplet;

  /// Throws ValidationError for degenerate parameters.
  void check() const;
};

struct SyntheticVideo {
  FeatureTensor tensor;
  std::size_t group = 0;
  /// Motion identity; equal ids share a_m and w_m.
  std::size_t motion = 0;
  /// Appearance identity before any category edit.
  std::size_t appearance = 0;
  Role role = Role::kReference;
  Category category = Category::kNone;
  std::string label;
};

/// Deterministic in-memory dataset. Values are rounded to float32 so they
/// match what a round trip through MVFT files yields.
std::vector<SyntheticVideo> synthesize(const SyntheticSpec& spec);

/// Writes `features/<id>.mvft` and `manifest.json` under `out_dir` and
/// returns the loaded manifest.
BenchmarkManifest generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

}  // namespace mret
