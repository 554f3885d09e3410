#include "mret/manifest.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>

#include "mret/errors.hpp"
#include "mret/feature_tensor.hpp"

namespace mret {

using nlohmann::json;

std::string_view to_string(ManifestKind kind) noexcept {
  switch (kind) {
    case ManifestKind::kTripletSynthetic: return "triplet_synthetic";
    case ManifestKind::kTripletReal: return "triplet_real";
    case ManifestKind::kLabeledKnn: return "labeled_knn";
  }
  return "triplet_synthetic";
}

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::kReference: return "reference";
    case Role::kPositive: return "positive";
    case Role::kNegative: return "negative";
    case Role::kRandomNegative: return "random_negative";
    case Role::kGallery: return "gallery";
    case Role::kQuery: return "query";
  }
  return "reference";
}

std::string_view to_string(Category category) noexcept {
  switch (category) {
    case Category::kNone: return "none";
    case Category::kStatic: return "Static";
    case Category::kDynApp: return "Dyn-App";
    case Category::kDynObj: return "Dyn-Obj";
    case Category::kView: return "View";
    case Category::kStyle: return "Style";
  }
  return "none";
}

ManifestKind parse_manifest_kind(std::string_view text) {
  if (text == "triplet_synthetic") return ManifestKind::kTripletSynthetic;
  if (text == "triplet_real") return ManifestKind::kTripletReal;
  if (text == "labeled_knn") return ManifestKind::kLabeledKnn;
  throw ValidationError("schema violation: unknown manifest kind '" + std::string(text) + "'");
}

Role parse_role(std::string_view text) {
  for (auto r : {Role::kReference, Role::kPositive, Role::kNegative, Role::kRandomNegative, Role::kGallery,
                 Role::kQuery}) {
    if (text == to_string(r)) return r;
  }
  throw ValidationError("schema violation: unknown role '" + std::string(text) + "'");
}

Category parse_category(std::string_view text) {
  for (auto c : {Category::kNone, Category::kStatic, Category::kDynApp, Category::kDynObj, Category::kView,
                 Category::kStyle}) {
    if (text == to_string(c)) return c;
  }
  throw ValidationError("schema violation: unknown category '" + std::string(text) + "'");
}

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError("schema violation: " + where + " is missing '" + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string()) throw ValidationError("schema violation: " + where + "." + key + " must be a string");
  auto s = v.get<std::string>();
  if (s.empty()) throw ValidationError("schema violation: " + where + "." + key + " is empty");
  return s;
}

std::string optional_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw ValidationError("schema violation: " + where + "." + key + " must be a string");
  return it->get<std::string>();
}

bool is_triplet_role(Role r) {
  return r == Role::kReference || r == Role::kPositive || r == Role::kNegative || r == Role::kRandomNegative;
}

}  // namespace

BenchmarkManifest BenchmarkManifest::from_json(const json& doc, const std::filesystem::path& base_dir,
                                               bool check_files) {
  if (!doc.is_object()) throw ValidationError("schema violation: manifest must be a JSON object");
  BenchmarkManifest m;
  m.base_dir = base_dir;
  m.name = require_string(doc, "name", "manifest");
  m.kind = parse_manifest_kind(require_string(doc, "kind", "manifest"));
  if (auto it = doc.find("pool_size"); it != doc.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() <= 0) {
      throw ValidationError("schema violation: pool_size must be a positive integer");
    }
    if (m.kind != ManifestKind::kTripletReal) {
      throw ValidationError("schema violation: pool_size only applies to triplet_real manifests");
    }
    m.pool_size = it->get<std::size_t>();
  }
  const auto& entries = require(doc, "entries", "manifest");
  if (!entries.is_array() || entries.empty()) {
    throw ValidationError("schema violation: entries must be a non-empty array");
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const auto where = "entries[" + std::to_string(i) + "]";
    if (!e.is_object()) throw ValidationError("schema violation: " + where + " must be an object");
    ManifestEntry entry;
    entry.video_id = require_string(e, "video_id", where);
    entry.feature_path = require_string(e, "feature_path", where);
    entry.role = parse_role(require_string(e, "role", where));
    entry.triplet_id = optional_string(e, "triplet_id", where);
    const auto cat = optional_string(e, "category", where);
    entry.category = cat.empty() ? Category::kNone : parse_category(cat);
    entry.label = optional_string(e, "label", where);
    m.entries.push_back(std::move(entry));
  }
  m.rebuild();
  if (check_files) {
    for (const auto& id : m.videos_) {
      const auto path = m.feature_path_of(id);
      try {
        (void)read_feature_header(path);
      } catch (const Error& err) {
        throw ValidationError("dangling feature_path for '" + id + "' (" + path.string() + "): " + err.what());
      }
    }
  }
  return m;
}

void BenchmarkManifest::rebuild() {
  videos_.clear();
  paths_.clear();
  triplets_.clear();
  shared_random_.clear();
  labeled_ = LabeledSet{};

  const bool triplet_kind = kind != ManifestKind::kLabeledKnn;
  std::map<std::string, std::string> labels;
  std::map<std::string, std::size_t> triplet_pos;
  std::set<std::string> shared_seen;

  for (const auto& e : entries) {
    const auto where = "entry '" + e.video_id + "'";
    auto [it, inserted] = paths_.emplace(e.video_id, e.feature_path);
    if (inserted) {
      videos_.push_back(e.video_id);
    } else if (it->second != e.feature_path) {
      throw ValidationError("schema violation: video '" + e.video_id + "' listed with two feature paths");
    }

    if (triplet_kind) {
      if (!is_triplet_role(e.role)) {
        throw ValidationError("schema violation: role '" + std::string(to_string(e.role)) +
                              "' not allowed in a triplet manifest (" + where + ")");
      }
      if (e.role == Role::kRandomNegative && kind != ManifestKind::kTripletReal) {
        throw ValidationError("schema violation: random_negative only allowed in triplet_real (" + where + ")");
      }
      if (e.role == Role::kRandomNegative && e.triplet_id.empty()) {
        if (shared_seen.insert(e.video_id).second) shared_random_.push_back(e.video_id);
        continue;
      }
      if (e.triplet_id.empty()) {
        throw ValidationError("schema violation: " + where + " needs a triplet_id");
      }
      auto [pos, fresh] = triplet_pos.emplace(e.triplet_id, triplets_.size());
      if (fresh) {
        Triplet t;
        t.id = e.triplet_id;
        triplets_.push_back(std::move(t));
      }
      auto& t = triplets_[pos->second];
      if (e.category != Category::kNone) {
        if (t.category != Category::kNone && t.category != e.category) {
          throw ValidationError("malformed triplet '" + t.id + "': conflicting categories");
        }
        t.category = e.category;
      }
      switch (e.role) {
        case Role::kReference:
          if (!t.reference.empty()) throw ValidationError("malformed triplet '" + t.id + "': two references");
          t.reference = e.video_id;
          break;
        case Role::kPositive:
          if (!t.positive.empty()) throw ValidationError("malformed triplet '" + t.id + "': two positives");
          t.positive = e.video_id;
          break;
        case Role::kNegative: t.negatives.push_back(e.video_id); break;
        case Role::kRandomNegative: t.random_negatives.push_back(e.video_id); break;
        default: break;
      }
    } else {
      if (e.role != Role::kGallery && e.role != Role::kQuery) {
        throw ValidationError("schema violation: role '" + std::string(to_string(e.role)) +
                              "' not allowed in a labeled_knn manifest (" + where + ")");
      }
      if (e.label.empty()) throw ValidationError("schema violation: " + where + " needs a label");
      auto [lit, fresh] = labels.emplace(e.video_id, e.label);
      if (!fresh && lit->second != e.label) {
        throw ValidationError("schema violation: video '" + e.video_id + "' has two labels");
      }
      labeled_.add(e.video_id, e.label, e.role == Role::kGallery ? Split::kGallery : Split::kQuery);
    }
  }

  if (triplet_kind) {
    if (triplets_.empty()) throw ValidationError("schema violation: manifest declares no triplets");
    for (const auto& t : triplets_) {
      if (t.reference.empty()) throw ValidationError("malformed triplet '" + t.id + "': missing reference");
      if (t.positive.empty()) throw ValidationError("malformed triplet '" + t.id + "': missing positive");
      if (t.negatives.empty()) throw ValidationError("malformed triplet '" + t.id + "': missing negative");
      if (t.positive == t.reference) {
        throw ValidationError("malformed triplet '" + t.id + "': positive is the reference");
      }
      if (kind == ManifestKind::kTripletSynthetic) {
        const bool known = std::find(std::begin(kSyntheticCategories), std::end(kSyntheticCategories),
                                     t.category) != std::end(kSyntheticCategories);
        if (!known) {
          throw ValidationError("malformed triplet '" + t.id +
                                "': synthetic triplets need a category (Static, Dyn-App, Dyn-Obj, View, Style)");
        }
      }
      if (pool_size) {
        const auto n = candidate_pool(t).size();
        if (n != *pool_size) {
          throw ValidationError("malformed triplet '" + t.id + "': candidate pool has " + std::to_string(n) +
                                " videos, manifest requires " + std::to_string(*pool_size));
        }
      }
    }
  } else {
    if (labeled_.queries().empty()) throw ValidationError("schema violation: labeled_knn manifest has no queries");
    if (labeled_.gallery().empty()) throw ValidationError("schema violation: labeled_knn manifest has no gallery");
  }
}

std::vector<std::string> BenchmarkManifest::candidate_pool(const Triplet& triplet) const {
  std::vector<std::string> pool;
  std::set<std::string> seen{triplet.reference};
  auto push = [&](const std::string& id) {
    if (seen.insert(id).second) pool.push_back(id);
  };
  if (kind == ManifestKind::kTripletSynthetic) {
    // The positive must be present even if it only appears in this triplet.
    push(triplet.positive);
    for (const auto& id : triplet.negatives) push(id);
    for (const auto& id : videos_) push(id);
  } else {
    push(triplet.positive);
    for (const auto& id : triplet.negatives) push(id);
    for (const auto& id : triplet.random_negatives) push(id);
    for (const auto& id : shared_random_) push(id);
  }
  return pool;
}

std::filesystem::path BenchmarkManifest::feature_path_of(std::string_view video_id) const {
  auto it = paths_.find(video_id);
  if (it == paths_.end()) throw ContractError("video '" + std::string(video_id) + "' is not in the manifest");
  std::filesystem::path p(it->second);
  return p.is_absolute() ? p : base_dir / p;
}

BenchmarkManifest BenchmarkManifest::load(const std::filesystem::path& path, bool check_files) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("schema violation: manifest is not valid JSON: " + std::string(e.what()));
  }
  return from_json(doc, path.parent_path(), check_files);
}

json BenchmarkManifest::to_json() const {
  json doc;
  doc["name"] = name;
  doc["kind"] = std::string(to_string(kind));
  if (pool_size) doc["pool_size"] = *pool_size;
  json arr = json::array();
  for (const auto& e : entries) {
    json j;
    j["video_id"] = e.video_id;
    j["feature_path"] = e.feature_path;
    j["role"] = std::string(to_string(e.role));
    if (!e.triplet_id.empty()) j["triplet_id"] = e.triplet_id;
    if (e.category != Category::kNone) j["category"] = std::string(to_string(e.category));
    if (!e.label.empty()) j["label"] = e.label;
    arr.push_back(std::move(j));
  }
  doc["entries"] = std::move(arr);
  return doc;
}

void BenchmarkManifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << to_json().dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace mret
