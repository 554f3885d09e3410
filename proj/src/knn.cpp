#include "mret/knn.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>

#include "mret/errors.hpp"
#include "mret/parallel.hpp"

namespace mret {

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::kGallery: return "gallery";
    case Split::kQuery: return "query";
    case Split::kBoth: return "both";
  }
  return "gallery";
}

Split parse_split(std::string_view text) {
  if (text == "gallery") return Split::kGallery;
  if (text == "query") return Split::kQuery;
  if (text == "both") return Split::kBoth;
  throw ValidationError("unknown split '" + std::string(text) + "' (gallery, query, both)");
}

void LabeledSet::add(const std::string& video_id, const std::string& label, Split split) {
  if (video_id.empty()) throw ValidationError("labeled set entry with empty video_id");
  if (label.empty()) throw ValidationError("video '" + video_id + "' has an empty label");
  auto [it, inserted] = labels_.emplace(video_id, label);
  if (!inserted && it->second != label) {
    throw ValidationError("video '" + video_id + "' has conflicting labels");
  }
  auto& current = splits_[video_id];
  const bool had_gallery = !inserted && (current == Split::kGallery || current == Split::kBoth);
  const bool had_query = !inserted && (current == Split::kQuery || current == Split::kBoth);
  const bool want_gallery = split == Split::kGallery || split == Split::kBoth;
  const bool want_query = split == Split::kQuery || split == Split::kBoth;
  if (want_gallery && !had_gallery) gallery_.push_back(video_id);
  if (want_query && !had_query) queries_.push_back(video_id);
  const bool g = had_gallery || want_gallery;
  const bool q = had_query || want_query;
  current = g && q ? Split::kBoth : (q ? Split::kQuery : Split::kGallery);
}

const std::string& LabeledSet::label_of(std::string_view video_id) const {
  auto it = labels_.find(std::string(video_id));
  if (it == labels_.end()) throw ContractError("no label for video '" + std::string(video_id) + "'");
  return it->second;
}

void LabeledSet::check_against(const EmbeddingIndex& index) const {
  for (const auto* list : {&gallery_, &queries_}) {
    for (const auto& id : *list) {
      if (!index.find(id)) throw ValidationError("labeled video '" + id + "' is not in the index");
    }
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  out.push_back(cell);
  return out;
}

}  // namespace

LabeledSet LabeledSet::load_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("labeled set CSV is empty");
  const auto header = split_csv_line(line);
  if (header != std::vector<std::string>{"video_id", "label", "split"}) {
    throw ValidationError("labeled set CSV header must be 'video_id,label,split'");
  }
  LabeledSet set;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 3) {
      throw ValidationError("labeled set CSV line " + std::to_string(line_no) + ": expected 3 fields");
    }
    set.add(cells[0], cells[1], parse_split(cells[2]));
  }
  return set;
}

LabeledSet LabeledSet::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return load_csv(in);
}

KnnResult knn(const EmbeddingIndex& index, std::string_view query_id, std::size_t k,
              std::span<const std::string> gallery) {
  if (k == 0) throw ContractError("K must be >= 1");
  if (gallery.empty()) throw ContractError("empty gallery");
  if (std::find(gallery.begin(), gallery.end(), query_id) != gallery.end()) {
    throw ContractError("gallery contains the query '" + std::string(query_id) + "'");
  }
  auto ranked = rank(index, query_id, gallery);
  KnnResult out;
  out.truncated = ranked.entries.size() < k;
  if (ranked.entries.size() > k) ranked.entries.resize(k);
  out.neighbors = std::move(ranked.entries);
  return out;
}

namespace {

const std::string& lookup_label(const LabelMap& labels, const std::string& id) {
  auto it = labels.find(id);
  if (it == labels.end()) throw ContractError("missing label for neighbor '" + id + "'");
  return it->second;
}

}  // namespace

std::string majority_vote(std::span<const ScoredId> neighbors, const LabelMap& labels) {
  if (neighbors.empty()) throw ContractError("majority_vote needs at least one neighbor");
  struct Tally {
    std::size_t count = 0;
    double similarity = 0.0;
  };
  std::map<std::string, Tally> tallies;
  for (const auto& n : neighbors) {
    auto& t = tallies[lookup_label(labels, n.id)];
    ++t.count;
    t.similarity += n.score;
  }
  // std::map iterates labels in ascending order, so strict comparisons keep
  // the lexicographically smallest label on a full tie.
  auto best = tallies.begin();
  for (auto it = std::next(tallies.begin()); it != tallies.end(); ++it) {
    const auto& a = it->second;
    const auto& b = best->second;
    if (a.count > b.count || (a.count == b.count && a.similarity > b.similarity)) best = it;
  }
  return best->first;
}

std::vector<LabelScore> weighted_vote(std::span<const ScoredId> neighbors, const LabelMap& labels,
                                      const VoteOptions& options) {
  if (neighbors.empty()) throw ContractError("weighted_vote needs at least one neighbor");
  std::map<std::string, double> totals;
  for (const auto& n : neighbors) {
    double w = options.unit_weights ? 1.0 : n.score;
    if (options.clamp_negative && w < 0.0) w = 0.0;
    totals[lookup_label(labels, n.id)] += w;
  }
  std::vector<LabelScore> out;
  out.reserve(totals.size());
  for (const auto& [label, score] : totals) out.push_back({label, score});
  // Input is label-sorted; stable sort keeps that order among equal scores.
  std::stable_sort(out.begin(), out.end(),
                   [](const LabelScore& a, const LabelScore& b) { return a.score > b.score; });
  return out;
}

std::size_t KnnReport::truncated_queries() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(queries.begin(), queries.end(), [](const KnnQueryRecord& q) { return q.truncated; }));
}

KnnReport eval_knn(const EmbeddingIndex& index, const LabeledSet& labeled, const KnnOptions& options) {
  if (options.k == 0) throw ContractError("K must be >= 1");
  labeled.check_against(index);
  if (labeled.queries().empty()) throw ContractError("labeled set has no queries");

  std::vector<std::size_t> gallery_rows;
  gallery_rows.reserve(labeled.gallery().size());
  for (const auto& id : labeled.gallery()) gallery_rows.push_back(index.row_of(id));

  KnnReport report;
  report.k = options.k;
  report.queries.resize(labeled.queries().size());
  parallel_for(report.queries.size(), options.threads, [&](std::size_t qi) {
    const auto& qid = labeled.queries()[qi];
    const auto qrow = index.row_of(qid);
    auto ranked = rank_rows(index, qrow, gallery_rows);
    if (ranked.empty()) throw ContractError("empty gallery for query '" + qid + "'");
    KnnQueryRecord rec;
    rec.query_id = qid;
    rec.true_label = labeled.label_of(qid);
    rec.truncated = ranked.size() < options.k;
    if (ranked.size() > options.k) ranked.resize(options.k);
    for (const auto& sr : ranked) {
      rec.neighbors.push_back({index.ids()[sr.row], sr.score});
      rec.neighbor_labels.push_back(labeled.label_of(index.ids()[sr.row]));
    }
    rec.majority_prediction = majority_vote(rec.neighbors, labeled.labels());
    rec.weighted_ranking = weighted_vote(rec.neighbors, labeled.labels(), options.vote);
    report.queries[qi] = std::move(rec);
  });

  std::size_t maj = 0, w1 = 0, w5 = 0;
  for (const auto& rec : report.queries) {
    if (rec.majority_prediction == rec.true_label) ++maj;
    if (rec.weighted_ranking.front().label == rec.true_label) ++w1;
    const auto top = std::min<std::size_t>(5, rec.weighted_ranking.size());
    for (std::size_t i = 0; i < top; ++i) {
      if (rec.weighted_ranking[i].label == rec.true_label) {
        ++w5;
        break;
      }
    }
  }
  const auto n = static_cast<double>(report.queries.size());
  report.acc1_majority = static_cast<double>(maj) / n;
  report.acc1_weighted = static_cast<double>(w1) / n;
  report.acc5_weighted = static_cast<double>(w5) / n;
  return report;
}

}  // namespace mret
