#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mret {

/// Which features the moment pipeline runs over.
enum class Level {
  kPatch,      ///< raw patch tokens
  kFrame,      ///< one vector per frame (patch mean)
  kPatchDiff,  ///< forward temporal differences of patch tokens
};

enum class Fusion { kConcat, kSum };

std::string_view to_string(Level level) noexcept;
std::string_view to_string(Fusion fusion) noexcept;
Level parse_level(std::string_view text);
Fusion parse_fusion(std::string_view text);

/// One point in the moment space: orders 1..K with per-order weights.
struct MomentConfig {
  std::vector<double> weights{1.0, 8.0, 4.0};
  Level level = Level::kPatch;
  Fusion fusion = Fusion::kConcat;
  /// L2-normalize each moment descriptor before it is weighted.
  bool per_moment_normalize = true;
  /// Target frame count; metadata for extraction and frame sweeps.
  std::size_t frames = 32;

  std::size_t orders() const noexcept { return weights.size(); }

  /// Throws ValidationError unless K >= 1, frames >= 1, weights finite and not all zero.
  void check() const;

  /// `orders=3;weights=1,8,4;level=patch;fusion=concat;per_moment_normalize=true;frames=32`
  std::string canonical() const;

  /// Parses the canonical key-value form. Missing keys keep their defaults;
  /// `orders`, when present, must match the weight count.
  static MomentConfig parse(std::string_view text);

  /// 16 hex digits of FNV-1a/64 over canonical().
  std::string digest() const;

  /// Ablation-table label, e.g. `(1,8,4)-patch-concat` or `(1,8,4)-diff-patch-concat`.
  /// Raw-magnitude configs get a `-raw` suffix.
  std::string label() const;

  /// Inverse of label(); per_moment_normalize and frames come from `base`.
  static MomentConfig from_label(std::string_view label, const MomentConfig& base);
  static MomentConfig from_label(std::string_view label);

  friend bool operator==(const MomentConfig&, const MomentConfig&) = default;
};

/// Shortest decimal text that round-trips the double.
std::string format_number(double value);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace mret
