#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mret/retrieval.hpp"

namespace mret {

enum class Split { kGallery, kQuery, kBoth };

std::string_view to_string(Split split) noexcept;
Split parse_split(std::string_view text);

using LabelMap = std::unordered_map<std::string, std::string>;

/// Class labels plus the gallery/query partition. `both` puts a video in
/// each role; a query is never part of its own gallery.
class LabeledSet {
 public:
  void add(const std::string& video_id, const std::string& label, Split split);

  const LabelMap& labels() const noexcept { return labels_; }
  const std::vector<std::string>& gallery() const noexcept { return gallery_; }
  const std::vector<std::string>& queries() const noexcept { return queries_; }
  const std::string& label_of(std::string_view video_id) const;

  /// Throws ValidationError when a query or gallery id is missing from `index`.
  void check_against(const EmbeddingIndex& index) const;

  /// CSV with header `video_id,label,split`.
  static LabeledSet load_csv(std::istream& in);
  static LabeledSet load_csv(const std::filesystem::path& path);

 private:
  LabelMap labels_;
  std::unordered_map<std::string, Split> splits_;
  std::vector<std::string> gallery_;
  std::vector<std::string> queries_;
};

struct KnnResult {
  std::vector<ScoredId> neighbors;
  /// Set when the gallery held fewer than K candidates.
  bool truncated = false;
};

/// Top-K of rank() restricted to `gallery`, which must not contain the query.
KnnResult knn(const EmbeddingIndex& index, std::string_view query_id, std::size_t k,
              std::span<const std::string> gallery);

/// Most frequent label; count ties go to the larger similarity sum, then the
/// lexicographically smaller label.
std::string majority_vote(std::span<const ScoredId> neighbors, const LabelMap& labels);

struct LabelScore {
  std::string label;
  double score = 0.0;

  friend bool operator==(const LabelScore&, const LabelScore&) = default;
};

struct VoteOptions {
  /// Negative similarities contribute 0 instead of subtracting.
  bool clamp_negative = true;
  /// Every neighbor contributes 1 (reduces to counting).
  bool unit_weights = false;
};

/// Per-label similarity totals, highest first, lexicographic on ties.
std::vector<LabelScore> weighted_vote(std::span<const ScoredId> neighbors, const LabelMap& labels,
                                      const VoteOptions& options = {});

struct KnnQueryRecord {
  std::string query_id;
  std::string true_label;
  std::vector<ScoredId> neighbors;
  std::vector<std::string> neighbor_labels;
  std::string majority_prediction;
  std::vector<LabelScore> weighted_ranking;
  bool truncated = false;

  friend bool operator==(const KnnQueryRecord&, const KnnQueryRecord&) = default;
};

struct KnnReport {
  std::size_t k = 20;
  double acc1_majority = 0.0;
  double acc1_weighted = 0.0;
  double acc5_weighted = 0.0;
  std::vector<KnnQueryRecord> queries;

  std::size_t truncated_queries() const noexcept;

  friend bool operator==(const KnnReport&, const KnnReport&) = default;
};

struct KnnOptions {
  std::size_t k = 20;
  VoteOptions vote;
  std::size_t threads = 1;
};

KnnReport eval_knn(const EmbeddingIndex& index, const LabeledSet& labeled, const KnnOptions& options = {});

}  // namespace mret
