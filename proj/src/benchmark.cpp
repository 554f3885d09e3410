#include "mret/benchmark.hpp"

#include <algorithm>
#include <set>

#include "mret/errors.hpp"
#include "mret/parallel.hpp"

namespace mret {

std::optional<MomentEmbedding> EmbeddingCache::get(const std::string& key, const std::string& feature_file) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find({key, feature_file});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::put(const std::string& key, const std::string& feature_file,
                         const MomentEmbedding& embedding) {
  std::lock_guard lock(mutex_);
  entries_.insert_or_assign({key, feature_file}, embedding);
}

std::size_t EmbeddingCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::string FrameSource::cache_key() const {
  std::string key = count == 0 ? "all" : "n=" + std::to_string(count);
  if (directory) key += "@" + directory->string();
  return key;
}

namespace {

std::filesystem::path source_path(const BenchmarkManifest& manifest, const std::string& id,
                                  const FrameSource& source) {
  auto path = manifest.feature_path_of(id);
  if (source.directory) return *source.directory / path.filename();
  return path;
}

MomentEmbedding embed_one(const std::filesystem::path& path, const std::string& id, const MomentConfig& config,
                          const FrameSource& source) {
  auto tensor = read_feature_file(path);
  tensor.video_id = id;
  if (source.count != 0) tensor = subsample_frames(tensor, source.count);
  return compute_embedding(tensor, config);
}

}  // namespace

EmbeddedSet embed_manifest(const BenchmarkManifest& manifest, const MomentConfig& config, const RunOptions& options,
                           const FrameSource& source) {
  config.check();
  const auto key = config.digest() + "|" + source.cache_key();
  EmbeddedSet out;
  out.ids = manifest.videos();
  out.embeddings.resize(out.ids.size());
  std::vector<std::string> errors(out.ids.size());

  parallel_for(out.ids.size(), options.threads, [&](std::size_t i) {
    const auto& id = out.ids[i];
    const auto path = source_path(manifest, id, source);
    const auto file_key = std::filesystem::absolute(path).lexically_normal().string();
    if (options.cache) {
      if (auto hit = options.cache->get(key, file_key)) {
        hit->video_id = id;
        out.embeddings[i] = std::move(*hit);
        return;
      }
    }
    try {
      auto e = embed_one(path, id, config, source);
      if (options.cache) options.cache->put(key, file_key, e);
      out.embeddings[i] = std::move(e);
    } catch (const Error& err) {
      errors[i] = err.what();
    }
  });

  std::vector<MomentEmbedding> ok;
  for (std::size_t i = 0; i < out.ids.size(); ++i) {
    if (out.embeddings[i]) {
      ok.push_back(*out.embeddings[i]);
    } else {
      out.failures.emplace_back(out.ids[i], errors[i]);
    }
  }
  if (!ok.empty()) out.index = build_index(ok);
  return out;
}

namespace {

TripletRecord evaluate_triplet(const BenchmarkManifest& manifest, const Triplet& t, const EmbeddedSet& set) {
  TripletRecord rec;
  rec.triplet_id = t.id;
  rec.category = t.category;
  const auto pool = manifest.candidate_pool(t);
  rec.pool_size = pool.size();

  const auto* index = set.index ? &*set.index : nullptr;
  auto require = [&](const std::string& id) -> std::optional<std::size_t> {
    if (index) {
      if (auto r = index->find(id)) return r;
    }
    rec.error = "video '" + id + "' has no embedding";
    return std::nullopt;
  };
  const auto qrow = require(t.reference);
  if (!qrow) return rec;
  const auto prow = require(t.positive);
  if (!prow) return rec;
  for (const auto& n : t.negatives) {
    if (!require(n)) return rec;
  }

  std::vector<std::size_t> rows;
  rows.reserve(pool.size());
  for (const auto& id : pool) {
    if (auto r = index->find(id)) rows.push_back(*r);
  }
  const auto ranked = rank_rows(*index, *qrow, rows);
  rec.top_id = index->ids()[ranked.front().row];
  rec.top_score = ranked.front().score;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i].row == *prow) {
      rec.positive_rank = i + 1;
      rec.positive_score = ranked[i].score;
      break;
    }
  }
  rec.success = rec.positive_rank == 1;
  return rec;
}

}  // namespace

TripletReport run_triplet_benchmark(const BenchmarkManifest& manifest, const MomentConfig& config,
                                    const RunOptions& options, const FrameSource& source) {
  if (manifest.kind == ManifestKind::kLabeledKnn) {
    throw ContractError("run_triplet_benchmark needs a triplet manifest, got labeled_knn");
  }
  const auto set = embed_manifest(manifest, config, options, source);

  TripletReport report;
  report.manifest_name = manifest.name;
  report.kind = manifest.kind;
  report.config_label = config.label();
  report.config_digest = config.digest();
  report.failed_videos = set.failures;
  if (manifest.kind == ManifestKind::kTripletSynthetic) {
    report.pool_description =
        "all other manifest videos (" + std::to_string(manifest.videos().size() - 1) + " candidates per query)";
  } else {
    report.pool_description = "declared pools: positive + negatives + random negatives";
    if (manifest.pool_size) report.pool_description += " (" + std::to_string(*manifest.pool_size) + " candidates)";
  }

  const auto& triplets = manifest.triplets();
  report.triplets.resize(triplets.size());
  parallel_for(triplets.size(), options.threads,
               [&](std::size_t i) { report.triplets[i] = evaluate_triplet(manifest, triplets[i], set); });

  std::vector<Category> order;
  if (manifest.kind == ManifestKind::kTripletSynthetic) {
    order.assign(std::begin(kSyntheticCategories), std::end(kSyntheticCategories));
  } else {
    std::set<Category> seen;
    for (const auto& t : triplets) seen.insert(t.category);
    order.assign(seen.begin(), seen.end());
  }
  std::size_t total_correct = 0;
  for (auto cat : order) {
    CategoryAccuracy acc;
    acc.category = cat;
    for (const auto& rec : report.triplets) {
      if (rec.category != cat) continue;
      ++acc.total;
      if (rec.success) ++acc.correct;
    }
    if (acc.total == 0) continue;
    acc.accuracy = static_cast<double>(acc.correct) / static_cast<double>(acc.total);
    total_correct += acc.correct;
    report.categories.push_back(acc);
  }
  if (manifest.kind == ManifestKind::kTripletSynthetic) {
    double sum = 0.0;
    for (const auto& c : report.categories) sum += c.accuracy;
    report.average = report.categories.empty() ? 0.0 : sum / static_cast<double>(report.categories.size());
  } else {
    report.average = static_cast<double>(total_correct) / static_cast<double>(report.triplets.size());
  }
  return report;
}

KnnReport run_knn_benchmark(const BenchmarkManifest& manifest, const MomentConfig& config, std::size_t k,
                            const RunOptions& options, const VoteOptions& vote) {
  if (manifest.kind != ManifestKind::kLabeledKnn) {
    throw ContractError("run_knn_benchmark needs a labeled_knn manifest, got " + std::string(to_string(manifest.kind)));
  }
  const auto set = embed_manifest(manifest, config, options);
  if (!set.failures.empty()) {
    const auto& [id, msg] = set.failures.front();
    throw ValidationError("could not embed '" + id + "': " + msg);
  }
  KnnOptions ko;
  ko.k = k;
  ko.vote = vote;
  ko.threads = options.threads;
  return eval_knn(*set.index, manifest.labeled(), ko);
}

const SweepRow* SweepTable::find(std::string_view label) const {
  for (const auto& r : rows) {
    if (r.label == label) return &r;
  }
  return nullptr;
}

SweepTable ablation_sweep(const BenchmarkManifest& manifest, std::span<const MomentConfig> configs,
                          const RunOptions& options) {
  if (configs.empty()) throw ContractError("ablation_sweep needs at least one config");
  SweepTable table;
  table.manifest_name = manifest.name;
  for (const auto& cfg : configs) {
    SweepRow row;
    row.config = cfg;
    try {
      row.label = cfg.label();
      row.accuracy = run_triplet_benchmark(manifest, cfg, options).average;
    } catch (const Error& err) {
      row.error = err.what();
    }
    table.rows.push_back(std::move(row));
  }
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.accuracy.has_value() != b.accuracy.has_value()) return a.accuracy.has_value();
    return a.accuracy && *a.accuracy > *b.accuracy;
  });
  return table;
}

std::vector<MomentConfig> standard_ablation_configs(const MomentConfig& base) {
  const char* labels[] = {
      "(1,0,0)-patch-concat", "(0,1,0)-patch-concat", "(1,1,0)-patch-concat",
      "(1,8,0)-patch-concat", "(1,1,1)-patch-concat", "(1,8,4)-patch-sum",
      "(1,8,4)-frame-concat", "(1,8,4)-diff-patch-concat", "(1,8,4)-patch-concat",
  };
  std::vector<MomentConfig> out;
  for (const auto* l : labels) out.push_back(MomentConfig::from_label(l, base));
  return out;
}

FrameSweepTable frame_count_sweep(const BenchmarkManifest& manifest, const MomentConfig& config,
                                  std::span<const std::size_t> frame_counts, const RunOptions& options,
                                  const std::map<std::size_t, std::filesystem::path>& per_count_dirs) {
  if (frame_counts.empty()) throw ContractError("frame_count_sweep needs at least one frame count");
  std::size_t needed = 0;
  for (auto n : frame_counts) {
    if (n == 0) throw ContractError("frame counts must be >= 1");
    if (!per_count_dirs.contains(n)) needed = std::max(needed, n);
  }
  if (needed > 0) {
    for (const auto& id : manifest.videos()) {
      const auto header = read_feature_header(manifest.feature_path_of(id));
      if (header.frames < needed) {
        throw ContractError("video '" + id + "' has " + std::to_string(header.frames) + " frames, sweep needs " +
                            std::to_string(needed) + " (declare a per-count feature directory)");
      }
    }
  }

  FrameSweepTable table;
  table.manifest_name = manifest.name;
  table.config_label = config.label();
  for (auto n : frame_counts) {
    FrameSource source;
    source.count = n;
    if (auto it = per_count_dirs.find(n); it != per_count_dirs.end()) source.directory = it->second;
    FrameSweepRow row;
    row.frames = n;
    row.report = run_triplet_benchmark(manifest, config, options, source);
    row.accuracy = row.report.average;
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace mret
