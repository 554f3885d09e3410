#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mret/moments.hpp"

namespace mret {

/// Exact cosine index over L2-normalized rows. Immutable once built.
class EmbeddingIndex {
 public:
  EmbeddingIndex() = default;

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::string& config_digest() const noexcept { return digest_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::vector<double>& matrix() const noexcept { return matrix_; }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(matrix_).subspan(i * dim_, dim_);
  }

  std::optional<std::size_t> find(std::string_view id) const;
  /// Row of `id`; throws ContractError for unknown ids.
  std::size_t row_of(std::string_view id) const;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static EmbeddingIndex load(std::istream& in);
  static EmbeddingIndex load(const std::filesystem::path& path);

  /// Rows are re-normalized; insertion order is kept.
  static EmbeddingIndex from_rows(std::vector<std::string> ids, std::vector<double> matrix,
                                  std::size_t dim, std::string digest);

  friend bool operator==(const EmbeddingIndex& a, const EmbeddingIndex& b) {
    return a.dim_ == b.dim_ && a.digest_ == b.digest_ && a.ids_ == b.ids_ && a.matrix_ == b.matrix_;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<double> matrix_;
  std::size_t dim_ = 0;
  std::string digest_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

inline constexpr char kIndexMagic[4] = {'M', 'V', 'I', 'X'};
inline constexpr std::uint32_t kIndexVersion = 1;

/// Throws ContractError on empty input, duplicate ids, or mismatched
/// dimensions/config digests.
EmbeddingIndex build_index(std::span<const MomentEmbedding> embeddings);

/// Dot product; both inputs are assumed unit-norm.
double cosine(std::span<const double> a, std::span<const double> b);

struct ScoredId {
  std::string id;
  double score = 0.0;

  friend bool operator==(const ScoredId&, const ScoredId&) = default;
};

struct RankedList {
  std::string query_id;
  std::vector<ScoredId> entries;
};

struct ScoredRow {
  std::size_t row = 0;
  double score = 0.0;
};

/// Ranks `candidates` (row numbers, query excluded, duplicates ignored) by
/// descending cosine to `query_row`; exact ties go to the lower row.
std::vector<ScoredRow> rank_rows(const EmbeddingIndex& index, std::size_t query_row,
                                 std::span<const std::size_t> candidates);

/// Ranks the pool (default: whole index) against `query_id`, query excluded.
RankedList rank(const EmbeddingIndex& index, std::string_view query_id,
                std::optional<std::span<const std::string>> pool = std::nullopt);

/// True iff the top-ranked pool member is `positive_id`.
bool triplet_success(const EmbeddingIndex& index, std::string_view query_id,
                     std::string_view positive_id, std::span<const std::string> pool);

}  // namespace mret
