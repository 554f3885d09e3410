#include "mret/feature_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "binary_io.hpp"
#include "mret/errors.hpp"

namespace mret {

std::string_view to_string(ParseErrorKind kind) noexcept {
  switch (kind) {
    case ParseErrorKind::kBadMagic: return "bad magic";
    case ParseErrorKind::kUnsupportedVersion: return "unsupported version";
    case ParseErrorKind::kTruncatedHeader: return "truncated header";
    case ParseErrorKind::kTruncatedPayload: return "truncated payload";
    case ParseErrorKind::kShapeMismatch: return "shape mismatch";
    case ParseErrorKind::kInvalidShape: return "invalid shape";
    case ParseErrorKind::kInvalidId: return "invalid id";
    case ParseErrorKind::kNonFinite: return "non-finite value";
  }
  return "unknown";
}

bool is_valid_utf8(std::string_view bytes) noexcept {
  std::size_t i = 0;
  const auto n = bytes.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(bytes[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= n) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(bytes[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong encodings, surrogates and out-of-range code points.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000)) return false;
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += extra + 1;
  }
  return true;
}

TensorDiagnostics validate(const FeatureTensor& tensor) {
  constexpr std::size_t kMaxListed = 10;
  TensorDiagnostics diag;
  diag.video_id = tensor.video_id;
  diag.frames = tensor.frames;
  diag.patches = tensor.patches;
  diag.dim = tensor.dim;

  if (tensor.video_id.empty()) diag.issues.emplace_back("video_id is empty");
  if (!is_valid_utf8(tensor.video_id)) diag.issues.emplace_back("video_id is not valid UTF-8");
  if (tensor.frames == 0 || tensor.patches == 0 || tensor.dim == 0) {
    std::ostringstream os;
    os << "shape (" << tensor.frames << "," << tensor.patches << "," << tensor.dim
       << ") has a zero extent";
    diag.issues.push_back(os.str());
  }
  const auto expected = tensor.frames * tensor.patches * tensor.dim;
  if (tensor.data.size() != expected) {
    std::ostringstream os;
    os << "data length " << tensor.data.size() << " != T*P*d = " << expected;
    diag.issues.push_back(os.str());
  }

  std::size_t non_finite = 0;
  std::size_t finite_count = 0;
  double sum = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tensor.data.size(); ++i) {
    const double v = tensor.data[i];
    if (!std::isfinite(v)) {
      if (non_finite < kMaxListed) {
        std::ostringstream os;
        os << "non-finite value " << v << " at flat index " << i;
        diag.issues.push_back(os.str());
      }
      ++non_finite;
      continue;
    }
    ++finite_count;
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (non_finite > kMaxListed) {
    std::ostringstream os;
    os << (non_finite - kMaxListed) << " further non-finite values not listed";
    diag.issues.push_back(os.str());
  }
  diag.finite = non_finite == 0;
  if (finite_count > 0) {
    diag.min = lo;
    diag.max = hi;
    diag.mean = sum / static_cast<double>(finite_count);
  }
  return diag;
}

void FeatureTensor::check() const {
  auto diag = validate(*this);
  if (!diag.ok()) {
    throw ValidationError("tensor '" + video_id + "': " + diag.issues.front());
  }
}

std::uint64_t feature_file_size(const FeatureTensor& tensor) noexcept {
  return kFeatureFixedHeaderBytes + tensor.video_id.size() + 4ull * tensor.data.size();
}

namespace {

std::string encode_feature_file(const FeatureTensor& tensor) {
  tensor.check();
  constexpr auto kU32Max = std::numeric_limits<std::uint32_t>::max();
  if (tensor.frames > kU32Max || tensor.patches > kU32Max || tensor.dim > kU32Max ||
      tensor.video_id.size() > kU32Max) {
    throw ValidationError("tensor '" + tensor.video_id + "': extent does not fit in 32 bits");
  }
  std::string buf;
  buf.reserve(static_cast<std::size_t>(feature_file_size(tensor)));
  buf.append(kFeatureMagic, 4);
  detail::put_u32(buf, kFeatureVersion);
  detail::put_u32(buf, static_cast<std::uint32_t>(tensor.frames));
  detail::put_u32(buf, static_cast<std::uint32_t>(tensor.patches));
  detail::put_u32(buf, static_cast<std::uint32_t>(tensor.dim));
  detail::put_u32(buf, static_cast<std::uint32_t>(tensor.video_id.size()));
  buf.append(tensor.video_id);
  for (std::size_t i = 0; i < tensor.data.size(); ++i) {
    const auto f = static_cast<float>(tensor.data[i]);
    if (!std::isfinite(f)) {
      std::ostringstream os;
      os << "tensor '" << tensor.video_id << "': value " << tensor.data[i] << " at flat index " << i
         << " overflows float32";
      throw ValidationError(os.str());
    }
    detail::put_f32(buf, f);
  }
  return buf;
}

}  // namespace

std::uint64_t write_feature_file(const FeatureTensor& tensor, std::ostream& out) {
  const auto buf = encode_feature_file(tensor);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  out.flush();
  if (!out) throw IoError("failed writing feature stream for '" + tensor.video_id + "'");
  return buf.size();
}

std::uint64_t write_feature_file(const FeatureTensor& tensor, const std::filesystem::path& path) {
  const auto buf = encode_feature_file(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
  return buf.size();
}

FeatureHeader read_feature_header(std::istream& in) {
  const auto fixed = detail::read_up_to(in, kFeatureFixedHeaderBytes);
  const auto magic_len = std::min<std::size_t>(fixed.size(), 4);
  if (fixed.compare(0, magic_len, kFeatureMagic, magic_len) != 0) {
    throw ParseError(ParseErrorKind::kBadMagic, "stream does not start with MVFT");
  }
  if (fixed.size() < kFeatureFixedHeaderBytes) {
    throw ParseError(ParseErrorKind::kTruncatedHeader,
                     "expected 24 header bytes, got " + std::to_string(fixed.size()));
  }
  const auto* p = reinterpret_cast<const unsigned char*>(fixed.data());
  FeatureHeader h;
  h.version = detail::get_u32(p + 4);
  if (h.version != kFeatureVersion) {
    throw ParseError(ParseErrorKind::kUnsupportedVersion, "version " + std::to_string(h.version));
  }
  h.frames = detail::get_u32(p + 8);
  h.patches = detail::get_u32(p + 12);
  h.dim = detail::get_u32(p + 16);
  const auto id_len = detail::get_u32(p + 20);
  if (h.frames == 0 || h.patches == 0 || h.dim == 0) {
    std::ostringstream os;
    os << "shape (" << h.frames << "," << h.patches << "," << h.dim << ") has a zero extent";
    throw ParseError(ParseErrorKind::kInvalidShape, os.str());
  }
  if (id_len == 0) throw ParseError(ParseErrorKind::kInvalidId, "empty video_id");
  h.video_id = detail::read_up_to(in, id_len);
  if (h.video_id.size() < id_len) {
    throw ParseError(ParseErrorKind::kTruncatedHeader, "video_id block shorter than declared length");
  }
  if (!is_valid_utf8(h.video_id)) throw ParseError(ParseErrorKind::kInvalidId, "video_id is not UTF-8");
  return h;
}

FeatureTensor read_feature_file(std::istream& in) {
  auto h = read_feature_header(in);
  const auto count = h.element_count();
  // u32^3 can exceed 64 bits; such a stream can never be complete.
  const bool overflow = h.patches != 0 && h.dim != 0 &&
                        (std::uint64_t{h.frames} > std::numeric_limits<std::uint64_t>::max() / 4 /
                                                       h.patches / h.dim);
  if (overflow) throw ParseError(ParseErrorKind::kShapeMismatch, "declared shape exceeds addressable size");

  const auto payload = detail::read_up_to(in, count * 4);
  if (payload.size() < count * 4) {
    std::ostringstream os;
    os << "expected " << count * 4 << " payload bytes, got " << payload.size();
    throw ParseError(ParseErrorKind::kTruncatedPayload, os.str());
  }
  if (!detail::at_eof(in)) {
    throw ParseError(ParseErrorKind::kShapeMismatch, "bytes remain after the declared payload");
  }

  FeatureTensor t;
  t.video_id = std::move(h.video_id);
  t.frames = h.frames;
  t.patches = h.patches;
  t.dim = h.dim;
  t.data.resize(static_cast<std::size_t>(count));
  const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    const float f = detail::get_f32(p + 4 * i);
    if (!std::isfinite(f)) {
      throw ParseError(ParseErrorKind::kNonFinite, "flat index " + std::to_string(i));
    }
    t.data[i] = f;
  }
  return t;
}

namespace {

std::ifstream open_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

FeatureTensor read_feature_file(const std::filesystem::path& path) {
  auto in = open_binary(path);
  return read_feature_file(in);
}

FeatureHeader read_feature_header(const std::filesystem::path& path) {
  auto in = open_binary(path);
  return read_feature_header(in);
}

}  // namespace mret
