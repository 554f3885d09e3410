#include "mret/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mret/benchmark.hpp"
#include "mret/errors.hpp"
#include "mret/reports.hpp"
#include "mret/synthetic.hpp"

namespace mret {

ChanceBand chance_band(double p, std::size_t trials) {
  const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(std::max<std::size_t>(trials, 1)));
  return {p, std::max(0.0, p - 3.0 * sigma), std::min(1.0, p + 3.0 * sigma)};
}

bool SelftestResult::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const SelftestCheck& c) { return c.passed; });
}

std::string SelftestResult::log() const {
  std::ostringstream out;
  for (const auto& c : checks) out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  out << (passed() ? "selftest passed" : "selftest FAILED") << '\n';
  return out.str();
}

namespace {

template <typename Fn>
void run_check(SelftestResult& result, const std::string& name, Fn&& fn) {
  SelftestCheck check;
  check.name = name;
  try {
    check.passed = fn(check.detail);
  } catch (const std::exception& e) {
    check.passed = false;
    check.detail = std::string("exception: ") + e.what();
  }
  result.checks.push_back(std::move(check));
}

}  // namespace

SelftestResult run_selftest(const SelftestOptions& options) {
  SelftestResult result;
  RunOptions run;
  run.threads = options.threads;
  EmbeddingCache cache;
  run.cache = &cache;

  const auto full = MomentConfig::from_label("(1,8,4)-patch-concat");
  const auto mean_only = MomentConfig::from_label("(1,0,0)-patch-concat");
  const auto& evaluated = options.fault_inject ? mean_only : full;

  SyntheticSpec planted;
  planted.seed = options.seed;
  const auto manifest = generate_synthetic(planted, options.work_dir / "planted");

  TripletReport full_report;
  run_check(result, "planted-multi-moment", [&](std::string& detail) {
    full_report = run_triplet_benchmark(manifest, evaluated, run);
    detail = evaluated.label() + " accuracy " + percent(full_report.average) + "% (need >= 90.00%)";
    return full_report.average >= 0.9;
  });

  run_check(result, "planted-beats-mean-only", [&](std::string& detail) {
    const auto base = run_triplet_benchmark(manifest, mean_only, run);
    detail = evaluated.label() + " " + percent(full_report.average) + "% vs " + mean_only.label() + " " +
             percent(base.average) + "%";
    return full_report.average > base.average;
  });

  run_check(result, "no-signal-chance", [&](std::string& detail) {
    SyntheticSpec flat = planted;
    flat.motion_signal = 0.0;
    const auto m = generate_synthetic(flat, options.work_dir / "no_signal");
    const auto r = run_triplet_benchmark(m, full, run);
    std::size_t correct = 0;
    for (const auto& t : r.triplets) correct += t.success ? 1 : 0;
    const double rate = static_cast<double>(correct) / static_cast<double>(r.triplets.size());
    const auto band = chance_band(1.0 / static_cast<double>(m.videos().size() - 1), r.triplets.size());
    detail = "accuracy " + percent(rate) + "% within [" + percent(band.low) + ", " + percent(band.high) + "]%";
    return band.contains(rate);
  });

  run_check(result, "frame-sweep-identity", [&](std::string& detail) {
    const std::size_t counts[] = {planted.frames};
    const auto sweep = frame_count_sweep(manifest, full, counts, run);
    const auto baseline = run_triplet_benchmark(manifest, full, run);
    const bool same = sweep.rows.front().report == baseline;
    detail = same ? "n=T reproduces the baseline report" : "n=T report differs from baseline";
    return same;
  });

  run_check(result, "knn-planted", [&](std::string& detail) {
    SyntheticSpec labeled;
    labeled.seed = options.seed;
    labeled.layout = SyntheticLayout::kLabeled;
    labeled.groups = 3;
    labeled.per_group = 20;
    const auto m = generate_synthetic(labeled, options.work_dir / "labeled");
    const auto r = run_knn_benchmark(m, evaluated, kDefaultKnnK, run);
    detail = "K=" + std::to_string(r.k) + " top1-majority " + percent(r.acc1_majority) + "% top1-weighted " +
             percent(r.acc1_weighted) + "% top5-weighted " + percent(r.acc5_weighted) + "%";
    return r.acc1_majority >= 0.9 && r.acc1_weighted >= 0.9 && r.acc5_weighted >= r.acc1_weighted;
  });

  run_check(result, "feature-round-trip", [&](std::string& detail) {
    std::size_t checked = 0;
    for (const auto& id : manifest.videos()) {
      const auto t = read_feature_file(manifest.feature_path_of(id));
      if (!validate(t).ok() || t.video_id != id) {
        detail = "video '" + id + "' failed validation";
        return false;
      }
      ++checked;
    }
    detail = std::to_string(checked) + " feature files validated";
    return true;
  });

  return result;
}

}  // namespace mret
