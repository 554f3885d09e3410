#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mret {

/// Per-video patch features laid out [frame][patch][channel], row-major.
///
/// Values are held in double precision in memory; the on-disk payload is float32.
struct FeatureTensor {
  std::string video_id;
  std::size_t frames = 0;
  std::size_t patches = 0;
  std::size_t dim = 0;
  std::vector<double> data;

  FeatureTensor() = default;
  FeatureTensor(std::string id, std::size_t t, std::size_t p, std::size_t d)
      : video_id(std::move(id)), frames(t), patches(p), dim(d), data(t * p * d, 0.0) {}

  std::size_t frame_stride() const noexcept { return patches * dim; }
  std::size_t index(std::size_t t, std::size_t p, std::size_t c) const noexcept {
    return (t * patches + p) * dim + c;
  }
  double& at(std::size_t t, std::size_t p, std::size_t c) { return data[index(t, p, c)]; }
  double at(std::size_t t, std::size_t p, std::size_t c) const { return data[index(t, p, c)]; }

  std::span<const double> frame(std::size_t t) const {
    return std::span<const double>(data).subspan(t * frame_stride(), frame_stride());
  }
  std::span<double> frame(std::size_t t) {
    return std::span<double>(data).subspan(t * frame_stride(), frame_stride());
  }

  /// Throws ValidationError when shape, length or finiteness invariants fail.
  void check() const;

  friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;
};

struct TensorDiagnostics {
  std::string video_id;
  std::size_t frames = 0;
  std::size_t patches = 0;
  std::size_t dim = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  bool finite = true;
  std::vector<std::string> issues;

  bool ok() const noexcept { return issues.empty(); }
};

/// Scans a tensor and reports every invariant violation; never throws.
TensorDiagnostics validate(const FeatureTensor& tensor);

/// Header fields of an MVFT stream.
struct FeatureHeader {
  std::uint32_t version = 0;
  std::uint32_t frames = 0;
  std::uint32_t patches = 0;
  std::uint32_t dim = 0;
  std::string video_id;

  std::uint64_t element_count() const noexcept {
    return std::uint64_t{frames} * patches * dim;
  }
};

inline constexpr char kFeatureMagic[4] = {'M', 'V', 'F', 'T'};
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureFixedHeaderBytes = 24;

/// Serialized size in bytes: fixed header, id block, float32 payload.
std::uint64_t feature_file_size(const FeatureTensor& tensor) noexcept;

/// Writes the MVFT encoding. Validation happens before the first byte is emitted.
std::uint64_t write_feature_file(const FeatureTensor& tensor, std::ostream& out);
std::uint64_t write_feature_file(const FeatureTensor& tensor, const std::filesystem::path& path);

/// Reads one MVFT stream and requires the stream to end right after the payload.
FeatureTensor read_feature_file(std::istream& in);
FeatureTensor read_feature_file(const std::filesystem::path& path);

/// Parses only the header and id block.
FeatureHeader read_feature_header(std::istream& in);
FeatureHeader read_feature_header(const std::filesystem::path& path);

/// True when every byte is well-formed UTF-8.
bool is_valid_utf8(std::string_view bytes) noexcept;

}  // namespace mret
