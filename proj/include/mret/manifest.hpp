#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mret/knn.hpp"

namespace mret {

enum class ManifestKind { kTripletSynthetic, kTripletReal, kLabeledKnn };

enum class Role { kReference, kPositive, kNegative, kRandomNegative, kGallery, kQuery };

/// Motion-preserving edit categories of the synthetic triplet benchmark.
enum class Category { kNone, kStatic, kDynApp, kDynObj, kView, kStyle };

inline constexpr Category kSyntheticCategories[] = {Category::kStatic, Category::kDynApp, Category::kDynObj,
                                                    Category::kView, Category::kStyle};

std::string_view to_string(ManifestKind kind) noexcept;
std::string_view to_string(Role role) noexcept;
std::string_view to_string(Category category) noexcept;
ManifestKind parse_manifest_kind(std::string_view text);
Role parse_role(std::string_view text);
Category parse_category(std::string_view text);

struct ManifestEntry {
  std::string video_id;
  /// As written in the manifest; relative paths resolve against the manifest directory.
  std::string feature_path;
  Role role = Role::kReference;
  std::string triplet_id;
  Category category = Category::kNone;
  std::string label;
};

struct Triplet {
  std::string id;
  Category category = Category::kNone;
  std::string reference;
  std::string positive;
  std::vector<std::string> negatives;
  std::vector<std::string> random_negatives;
};

/// A validated benchmark description. The same video_id may appear in several
/// entries (e.g. as a negative of one triplet and the positive of another, or
/// as both query and gallery) provided its feature_path and label agree.
class BenchmarkManifest {
 public:
  std::string name;
  ManifestKind kind = ManifestKind::kTripletSynthetic;
  std::vector<ManifestEntry> entries;
  /// Required candidate count per triplet (real kind only).
  std::optional<std::size_t> pool_size;
  std::filesystem::path base_dir;

  /// Parses and validates. When `check_files` is set every feature_path must
  /// open and carry a valid MVFT header.
  static BenchmarkManifest from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                                     bool check_files = true);
  static BenchmarkManifest load(const std::filesystem::path& path, bool check_files = true);

  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;

  /// Unique video ids in first-appearance order.
  const std::vector<std::string>& videos() const noexcept { return videos_; }
  std::filesystem::path feature_path_of(std::string_view video_id) const;
  const std::vector<Triplet>& triplets() const noexcept { return triplets_; }
  /// Random negatives without a triplet_id; they join every triplet's pool.
  const std::vector<std::string>& shared_random_negatives() const noexcept { return shared_random_; }
  const LabeledSet& labeled() const noexcept { return labeled_; }

  /// Candidate ids for a triplet query, reference excluded, in manifest order.
  std::vector<std::string> candidate_pool(const Triplet& triplet) const;

 private:
  void rebuild();

  std::vector<std::string> videos_;
  std::map<std::string, std::string, std::less<>> paths_;
  std::vector<Triplet> triplets_;
  std::vector<std::string> shared_random_;
  LabeledSet labeled_;
};

}  // namespace mret
