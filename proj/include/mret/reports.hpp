#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "mret/benchmark.hpp"
#include "mret/knn.hpp"

namespace mret {

nlohmann::json to_json(const TripletReport& report);
nlohmann::json to_json(const KnnReport& report);
nlohmann::json to_json(const SweepTable& table);
nlohmann::json to_json(const FrameSweepTable& table);

/// Header line plus one summary row.
std::string to_csv(const TripletReport& report);
std::string to_csv(const KnnReport& report);
std::string to_csv(const SweepTable& table);
std::string to_csv(const FrameSweepTable& table);

/// Markdown tables; accuracies in percent.
std::string to_markdown(const TripletReport& report);
std::string to_markdown(const KnnReport& report);
std::string to_markdown(const SweepTable& table);
std::string to_markdown(const FrameSweepTable& table);

/// Writes `<prefix>.json`, `<prefix>.csv` and `<prefix>.md`.
template <typename Report>
void write_report_files(const Report& report, const std::filesystem::path& prefix);

std::string percent(double fraction);

}  // namespace mret
