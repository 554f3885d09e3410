#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mret/knn.hpp"
#include "mret/manifest.hpp"
#include "mret/moment_config.hpp"
#include "mret/moments.hpp"
#include "mret/retrieval.hpp"

namespace mret {

/// Embeddings keyed by (config digest + frame variant, feature file). Thread-safe.
class EmbeddingCache {
 public:
  std::optional<MomentEmbedding> get(const std::string& key, const std::string& feature_file) const;
  void put(const std::string& key, const std::string& feature_file, const MomentEmbedding& embedding);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, MomentEmbedding> entries_;
};

struct RunOptions {
  std::size_t threads = 1;
  EmbeddingCache* cache = nullptr;
};

/// How tensors are prepared before embedding.
struct FrameSource {
  /// 0 keeps every stored frame; otherwise subsample uniformly to this count.
  std::size_t count = 0;
  /// When set, features are read from `directory / filename(feature_path)`.
  std::optional<std::filesystem::path> directory;

  std::string cache_key() const;
};

/// Embeddings for every manifest video; failures are kept, not thrown.
struct EmbeddedSet {
  std::vector<std::string> ids;
  std::vector<std::optional<MomentEmbedding>> embeddings;
  /// video_id -> error message, in manifest order.
  std::vector<std::pair<std::string, std::string>> failures;
  /// Index over the successfully embedded videos only.
  std::optional<EmbeddingIndex> index;
};

EmbeddedSet embed_manifest(const BenchmarkManifest& manifest, const MomentConfig& config,
                           const RunOptions& options = {}, const FrameSource& source = {});

struct TripletRecord {
  std::string triplet_id;
  Category category = Category::kNone;
  bool success = false;
  /// 1-based rank of the positive in the pool; 0 when the query could not run.
  std::size_t positive_rank = 0;
  std::string top_id;
  double top_score = 0.0;
  double positive_score = 0.0;
  std::size_t pool_size = 0;
  std::string error;

  friend bool operator==(const TripletRecord&, const TripletRecord&) = default;
};

struct CategoryAccuracy {
  Category category = Category::kNone;
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;  ///< fraction in [0, 1]

  friend bool operator==(const CategoryAccuracy&, const CategoryAccuracy&) = default;
};

struct TripletReport {
  std::string manifest_name;
  ManifestKind kind = ManifestKind::kTripletSynthetic;
  std::string config_label;
  std::string config_digest;
  std::vector<CategoryAccuracy> categories;
  /// Unweighted category mean (synthetic) or plain accuracy (real); fraction in [0, 1].
  double average = 0.0;
  std::vector<TripletRecord> triplets;
  std::string pool_description;
  std::vector<std::pair<std::string, std::string>> failed_videos;

  friend bool operator==(const TripletReport&, const TripletReport&) = default;
};

/// Reference-as-query retrieval over each triplet's pool.
TripletReport run_triplet_benchmark(const BenchmarkManifest& manifest, const MomentConfig& config,
                                    const RunOptions& options = {}, const FrameSource& source = {});

inline constexpr std::size_t kDefaultKnnK = 20;

KnnReport run_knn_benchmark(const BenchmarkManifest& manifest, const MomentConfig& config,
                            std::size_t k = kDefaultKnnK, const RunOptions& options = {},
                            const VoteOptions& vote = {});

struct SweepRow {
  std::string label;
  MomentConfig config;
  std::optional<double> accuracy;
  std::string error;
};

/// Rows sorted by accuracy (descending, stable); failed rows last.
struct SweepTable {
  std::string manifest_name;
  std::vector<SweepRow> rows;

  const SweepRow* find(std::string_view label) const;
};

SweepTable ablation_sweep(const BenchmarkManifest& manifest, std::span<const MomentConfig> configs,
                          const RunOptions& options = {});

/// The nine standard moment/level/fusion ablation configurations.
std::vector<MomentConfig> standard_ablation_configs(const MomentConfig& base = {});

struct FrameSweepRow {
  std::size_t frames = 0;
  double accuracy = 0.0;
  TripletReport report;
};

struct FrameSweepTable {
  std::string manifest_name;
  std::string config_label;
  std::vector<FrameSweepRow> rows;
};

/// Subsamples every tensor to each count and reruns the triplet benchmark.
/// Counts above a video's frame total need an entry in `per_count_dirs`.
FrameSweepTable frame_count_sweep(const BenchmarkManifest& manifest, const MomentConfig& config,
                                  std::span<const std::size_t> frame_counts, const RunOptions& options = {},
                                  const std::map<std::size_t, std::filesystem::path>& per_count_dirs = {});

}  // namespace mret
