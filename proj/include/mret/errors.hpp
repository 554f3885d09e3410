#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mret {

/// Base for every error the engine raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a documented invariant (non-finite values, bad shapes, bad manifests).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Fused moment vector is zero, so the video has no usable direction.
class DegenerateEmbeddingError : public ContractError {
 public:
  explicit DegenerateEmbeddingError(std::string video_id)
      : ContractError("degenerate embedding for video '" + video_id + "'"),
        video_id_(std::move(video_id)) {}

  const std::string& video_id() const noexcept { return video_id_; }

 private:
  std::string video_id_;
};

/// Filesystem or stream failure.
class IoError : public Error {
 public:
  using Error::Error;
};

enum class ParseErrorKind {
  kBadMagic,
  kUnsupportedVersion,
  kTruncatedHeader,
  kTruncatedPayload,
  kShapeMismatch,
  kInvalidShape,
  kInvalidId,
  kNonFinite,
};

std::string_view to_string(ParseErrorKind kind) noexcept;

/// A binary stream does not follow the MVFT/MVIX grammar.
class ParseError : public ValidationError {
 public:
  ParseError(ParseErrorKind kind, const std::string& detail)
      : ValidationError(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ParseErrorKind kind() const noexcept { return kind_; }

 private:
  ParseErrorKind kind_;
};

}  // namespace mret
