#include "mret/reports.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mret/errors.hpp"

namespace mret {

using nlohmann::json;

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
  return buf;
}

json to_json(const TripletReport& report) {
  json j;
  j["manifest"] = report.manifest_name;
  j["kind"] = std::string(to_string(report.kind));
  j["config_label"] = report.config_label;
  j["config_digest"] = report.config_digest;
  j["pool"] = report.pool_description;
  j["average"] = report.average;
  json cats = json::array();
  for (const auto& c : report.categories) {
    cats.push_back({{"category", std::string(to_string(c.category))},
                    {"total", c.total},
                    {"correct", c.correct},
                    {"accuracy", c.accuracy}});
  }
  j["categories"] = std::move(cats);
  json trips = json::array();
  for (const auto& t : report.triplets) {
    json r{{"triplet_id", t.triplet_id},
           {"category", std::string(to_string(t.category))},
           {"success", t.success},
           {"positive_rank", t.positive_rank},
           {"top_id", t.top_id},
           {"top_score", t.top_score},
           {"positive_score", t.positive_score},
           {"pool_size", t.pool_size}};
    if (!t.error.empty()) r["error"] = t.error;
    trips.push_back(std::move(r));
  }
  j["triplets"] = std::move(trips);
  json failed = json::array();
  for (const auto& [id, msg] : report.failed_videos) failed.push_back({{"video_id", id}, {"error", msg}});
  j["failed_videos"] = std::move(failed);
  return j;
}

json to_json(const KnnReport& report) {
  json j;
  j["k"] = report.k;
  j["acc1_majority"] = report.acc1_majority;
  j["acc1_weighted"] = report.acc1_weighted;
  j["acc5_weighted"] = report.acc5_weighted;
  j["truncated_queries"] = report.truncated_queries();
  json qs = json::array();
  for (const auto& q : report.queries) {
    json neighbors = json::array();
    for (std::size_t i = 0; i < q.neighbors.size(); ++i) {
      neighbors.push_back({{"id", q.neighbors[i].id}, {"score", q.neighbors[i].score}, {"label", q.neighbor_labels[i]}});
    }
    json ranking = json::array();
    for (const auto& ls : q.weighted_ranking) ranking.push_back({{"label", ls.label}, {"score", ls.score}});
    qs.push_back({{"query_id", q.query_id},
                  {"true_label", q.true_label},
                  {"majority_prediction", q.majority_prediction},
                  {"weighted_ranking", std::move(ranking)},
                  {"neighbors", std::move(neighbors)},
                  {"truncated", q.truncated}});
  }
  j["queries"] = std::move(qs);
  return j;
}

json to_json(const SweepTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    json row{{"label", r.label}, {"config", r.config.canonical()}};
    if (r.accuracy) {
      row["accuracy"] = *r.accuracy;
    } else {
      row["accuracy"] = nullptr;
      row["error"] = r.error;
    }
    rows.push_back(std::move(row));
  }
  return {{"manifest", table.manifest_name}, {"rows", std::move(rows)}};
}

json to_json(const FrameSweepTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) rows.push_back({{"frames", r.frames}, {"accuracy", r.accuracy}});
  return {{"manifest", table.manifest_name}, {"config_label", table.config_label}, {"rows", std::move(rows)}};
}

std::string to_csv(const TripletReport& report) {
  std::ostringstream head, row;
  head << "manifest,config";
  row << report.manifest_name << ',' << report.config_label;
  for (const auto& c : report.categories) {
    head << ',' << to_string(c.category);
    row << ',' << percent(c.accuracy);
  }
  head << ",Avg\n";
  row << ',' << percent(report.average) << '\n';
  return head.str() + row.str();
}

std::string to_csv(const KnnReport& report) {
  std::ostringstream out;
  out << "k,queries,acc1_majority,acc1_weighted,acc5_weighted\n";
  out << report.k << ',' << report.queries.size() << ',' << percent(report.acc1_majority) << ','
      << percent(report.acc1_weighted) << ',' << percent(report.acc5_weighted) << '\n';
  return out.str();
}

std::string to_csv(const SweepTable& table) {
  std::ostringstream out;
  out << "configuration,accuracy\n";
  for (const auto& r : table.rows) out << r.label << ',' << (r.accuracy ? percent(*r.accuracy) : "error") << '\n';
  return out.str();
}

std::string to_csv(const FrameSweepTable& table) {
  std::ostringstream head, row;
  head << "frames";
  row << "accuracy";
  for (const auto& r : table.rows) {
    head << ',' << r.frames;
    row << ',' << percent(r.accuracy);
  }
  return head.str() + "\n" + row.str() + "\n";
}

std::string to_markdown(const TripletReport& report) {
  std::ostringstream out;
  out << "| Method |";
  for (const auto& c : report.categories) out << ' ' << to_string(c.category) << " |";
  out << " Avg |\n|---|";
  for (std::size_t i = 0; i < report.categories.size(); ++i) out << "---|";
  out << "---|\n| " << report.config_label << " |";
  for (const auto& c : report.categories) out << ' ' << percent(c.accuracy) << " |";
  out << ' ' << percent(report.average) << " |\n";
  return out.str();
}

std::string to_markdown(const KnnReport& report) {
  std::ostringstream out;
  out << "| K | Top-1 (majority) | Top-1 (weighted) | Top-5 (weighted) |\n|---|---|---|---|\n";
  out << "| " << report.k << " | " << percent(report.acc1_majority) << " | " << percent(report.acc1_weighted)
      << " | " << percent(report.acc5_weighted) << " |\n";
  return out.str();
}

std::string to_markdown(const SweepTable& table) {
  std::ostringstream out;
  out << "| Configuration | Retrieval Accuracy |\n|---|---|\n";
  for (const auto& r : table.rows) {
    out << "| " << r.label << " | " << (r.accuracy ? percent(*r.accuracy) : "error: " + r.error) << " |\n";
  }
  return out.str();
}

std::string to_markdown(const FrameSweepTable& table) {
  std::ostringstream out;
  out << "| number of frames |";
  for (const auto& r : table.rows) out << ' ' << r.frames << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < table.rows.size(); ++i) out << "---|";
  out << "\n| Retrieval Accuracy |";
  for (const auto& r : table.rows) out << ' ' << percent(r.accuracy) << " |";
  out << '\n';
  return out.str();
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

template <typename Report>
void write_report_files(const Report& report, const std::filesystem::path& prefix) {
  auto with = [&](const char* ext) {
    auto p = prefix;
    p += ext;
    return p;
  };
  write_text(with(".json"), to_json(report).dump(2) + "\n");
  write_text(with(".csv"), to_csv(report));
  write_text(with(".md"), to_markdown(report));
}

template void write_report_files(const TripletReport&, const std::filesystem::path&);
template void write_report_files(const KnnReport&, const std::filesystem::path&);
template void write_report_files(const SweepTable&, const std::filesystem::path&);
template void write_report_files(const FrameSweepTable&, const std::filesystem::path&);

}  // namespace mret
