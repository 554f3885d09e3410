#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "mret/benchmark.hpp"
#include "mret/errors.hpp"
#include "mret/heatmap.hpp"
#include "mret/manifest.hpp"
#include "mret/moments.hpp"
#include "mret/parallel.hpp"
#include "mret/reports.hpp"
#include "mret/retrieval.hpp"
#include "mret/selftest.hpp"
#include "mret/synthetic.hpp"

namespace mret::cli {

namespace {

namespace fs = std::filesystem;

struct GlobalFlags {
  std::size_t threads = 0;
  std::uint64_t seed = 7;
  bool json_errors = false;

  std::size_t thread_count() const { return threads == 0 ? default_thread_count() : threads; }
};

/// Moment config flags; explicitly given flags override --config.
struct ConfigFlags {
  std::string config;
  std::vector<double> weights;
  std::string level;
  std::string fusion;
  std::string per_moment_normalize;
  std::size_t frames = 0;

  CLI::Option* weights_opt = nullptr;
  CLI::Option* frames_opt = nullptr;

  void attach(CLI::App& app) {
    app.add_option("--config", config,
                   "Moment config as canonical text (orders=3;weights=1,8,4;...) or @file holding it");
    weights_opt = app.add_option("--weights", weights, "Per-order moment weights, comma separated (default 1,8,4)")
                      ->delimiter(',');
    app.add_option("--level", level, "Representation level: patch, frame or patch_diff (default patch)");
    app.add_option("--fusion", fusion, "Moment fusion: concat or sum (default concat)");
    app.add_option("--per-moment-normalize", per_moment_normalize,
                   "L2-normalize each moment block before weighting: true or false (default true)");
    frames_opt = app.add_option("--frames", frames, "Target frame count recorded in the config (default 32)");
  }

  MomentConfig resolve() const {
    MomentConfig cfg;
    if (!config.empty()) {
      std::string text = config;
      if (text.front() == '@') {
        std::ifstream in(text.substr(1));
        if (!in) throw IoError("cannot open config file '" + text.substr(1) + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
      }
      cfg = MomentConfig::parse(text);
    }
    if (weights_opt && weights_opt->count() > 0) cfg.weights = weights;
    if (!level.empty()) cfg.level = parse_level(level);
    if (!fusion.empty()) cfg.fusion = parse_fusion(fusion);
    if (!per_moment_normalize.empty()) {
      if (per_moment_normalize == "true") {
        cfg.per_moment_normalize = true;
      } else if (per_moment_normalize == "false") {
        cfg.per_moment_normalize = false;
      } else {
        throw ValidationError("--per-moment-normalize expects true or false");
      }
    }
    if (frames_opt && frames_opt->count() > 0) cfg.frames = frames;
    cfg.check();
    return cfg;
  }
};

std::vector<fs::path> collect_feature_files(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".mvft") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(p, ec)) {
      files.push_back(p);
    } else {
      throw IoError("no such file or directory: '" + in + "'");
    }
  }
  if (files.empty()) throw ValidationError("no feature files");
  return files;
}

std::vector<std::string> read_id_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

void write_text(const fs::path& path, const std::string& text, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct EmbedArgs {
  std::vector<std::string> features;
  std::string out;
  ConfigFlags config;
};

int cmd_embed(const EmbedArgs& args, const GlobalFlags& global, std::ostream& out, std::ostream& err) {
  const auto cfg = args.config.resolve();
  const auto files = collect_feature_files(args.features);
  std::vector<std::optional<MomentEmbedding>> embeddings(files.size());
  std::vector<std::string> errors(files.size());
  parallel_for(files.size(), global.thread_count(), [&](std::size_t i) {
    try {
      embeddings[i] = compute_embedding(read_feature_file(files[i]), cfg);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  std::vector<MomentEmbedding> ok;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (embeddings[i]) {
      ok.push_back(std::move(*embeddings[i]));
    } else {
      err << "error: " << files[i].string() << ": " << errors[i] << '\n';
      ++failed;
    }
  }
  if (failed > 0) {
    throw ValidationError(std::to_string(failed) + " of " + std::to_string(files.size()) +
                          " feature files could not be embedded");
  }
  const auto index = build_index(ok);
  index.save(fs::path(args.out));
  out << "embedded " << index.size() << " videos (dim " << index.dim() << ", config " << cfg.label() << ", digest "
      << index.config_digest() << ") -> " << args.out << '\n';
  return 0;
}

int cmd_index_info(const std::string& path, bool list_ids, std::ostream& out) {
  const auto index = EmbeddingIndex::load(fs::path(path));
  out << "videos\t" << index.size() << '\n';
  out << "dim\t" << index.dim() << '\n';
  out << "config_digest\t" << index.config_digest() << '\n';
  if (list_ids) {
    for (const auto& id : index.ids()) out << id << '\n';
  }
  return 0;
}

struct RetrieveArgs {
  std::string index;
  std::string query;
  std::vector<std::string> pool;
  std::string pool_file;
  std::size_t top = 10;
};

int cmd_retrieve(const RetrieveArgs& args, std::ostream& out) {
  const auto index = EmbeddingIndex::load(fs::path(args.index));
  std::optional<std::vector<std::string>> pool;
  if (!args.pool.empty()) pool = args.pool;
  if (!args.pool_file.empty()) {
    auto more = read_id_file(args.pool_file);
    if (!pool) pool.emplace();
    pool->insert(pool->end(), more.begin(), more.end());
  }
  const auto ranked = pool ? rank(index, args.query, std::span<const std::string>(*pool)) : rank(index, args.query);
  const auto n = args.top == 0 ? ranked.entries.size() : std::min(args.top, ranked.entries.size());
  out << "rank\tid\tscore\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << (i + 1) << '\t' << ranked.entries[i].id << '\t' << fixed6(ranked.entries[i].score) << '\n';
  }
  return 0;
}

struct HeatmapArgs {
  std::string index;
  std::vector<std::string> ids;
  std::string out;
  std::string pgm;
  std::size_t cell = 8;
};

int cmd_heatmap(const HeatmapArgs& args, std::ostream& out) {
  auto index = EmbeddingIndex::load(fs::path(args.index));
  if (!args.ids.empty()) {
    std::vector<double> rows;
    for (const auto& id : args.ids) {
      const auto r = index.row(index.row_of(id));
      rows.insert(rows.end(), r.begin(), r.end());
    }
    index = EmbeddingIndex::from_rows(args.ids, std::move(rows), index.dim(), index.config_digest());
  }
  const auto heat = similarity_heatmap(index);
  std::ostringstream csv;
  write_heatmap_csv(heat, csv);
  write_text(args.out, csv.str());
  if (!args.pgm.empty()) {
    std::ostringstream pgm;
    write_heatmap_pgm(heat, pgm, args.cell);
    write_text(args.pgm, pgm.str(), std::ios::out | std::ios::binary);
  }
  out << "heatmap " << heat.size() << "x" << heat.size() << " -> " << args.out << '\n';
  return 0;
}

struct EvalArgs {
  std::string manifest;
  ConfigFlags config;
  std::size_t knn = 0;
  bool no_clamp = false;
  std::vector<std::size_t> sweep_frames;
  std::vector<std::string> frame_dirs;
  std::string sweep_configs;
  std::string out;
};

std::vector<MomentConfig> parse_config_list(const std::string& text, const MomentConfig& base) {
  if (text == "standard") return standard_ablation_configs(base);
  std::vector<MomentConfig> out;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto semi = rest.find(';');
    const auto item = rest.substr(0, semi);
    if (!item.empty()) out.push_back(MomentConfig::from_label(item, base));
    if (semi == std::string_view::npos) break;
    rest.remove_prefix(semi + 1);
  }
  if (out.empty()) throw ValidationError("--sweep-configs lists no configurations");
  return out;
}

int cmd_eval(const EvalArgs& args, const GlobalFlags& global, std::ostream& out, std::ostream& err) {
  const auto manifest = BenchmarkManifest::load(fs::path(args.manifest));
  const auto cfg = args.config.resolve();
  RunOptions run;
  run.threads = global.thread_count();
  EmbeddingCache cache;
  run.cache = &cache;

  fs::path prefix = args.out;
  if (prefix.empty()) {
    prefix = fs::path(args.manifest).parent_path() / (fs::path(args.manifest).stem().string() + ".report");
  }

  if (manifest.kind == ManifestKind::kLabeledKnn) {
    if (!args.sweep_frames.empty() || !args.sweep_configs.empty()) {
      throw ValidationError("sweeps apply to triplet manifests only");
    }
    VoteOptions vote;
    vote.clamp_negative = !args.no_clamp;
    const auto report = run_knn_benchmark(manifest, cfg, args.knn == 0 ? kDefaultKnnK : args.knn, run, vote);
    write_report_files(report, prefix);
    out << to_markdown(report);
  } else if (args.knn != 0) {
    throw ValidationError("--knn needs a labeled_knn manifest, got " + std::string(to_string(manifest.kind)));
  } else if (!args.sweep_frames.empty()) {
    std::map<std::size_t, fs::path> dirs;
    for (const auto& spec : args.frame_dirs) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos) throw ValidationError("--frame-dir expects N=DIR, got '" + spec + "'");
      std::size_t n = 0;
      try {
        n = std::stoul(spec.substr(0, eq));
      } catch (const std::exception&) {
        throw ValidationError("--frame-dir expects N=DIR, got '" + spec + "'");
      }
      dirs[n] = spec.substr(eq + 1);
    }
    const auto table = frame_count_sweep(manifest, cfg, args.sweep_frames, run, dirs);
    write_report_files(table, prefix);
    out << to_markdown(table);
  } else if (!args.sweep_configs.empty()) {
    const auto configs = parse_config_list(args.sweep_configs, cfg);
    const auto table = ablation_sweep(manifest, configs, run);
    write_report_files(table, prefix);
    out << to_markdown(table);
  } else {
    const auto report = run_triplet_benchmark(manifest, cfg, run);
    for (const auto& [id, msg] : report.failed_videos) err << "warning: " << id << ": " << msg << '\n';
    write_report_files(report, prefix);
    out << to_markdown(report);
  }
  err << "reports written to " << prefix.string() << ".{json,csv,md}\n";
  return 0;
}

struct SynthArgs {
  std::string out;
  std::string layout = "triplet";
  SyntheticSpec spec;
};

int cmd_gen_synth(SynthArgs args, const GlobalFlags& global, std::ostream& out) {
  args.spec.seed = global.seed;
  if (args.layout == "triplet") {
    args.spec.layout = SyntheticLayout::kTriplet;
  } else if (args.layout == "labeled") {
    args.spec.layout = SyntheticLayout::kLabeled;
  } else {
    throw ValidationError("--layout expects triplet or labeled");
  }
  const auto manifest = generate_synthetic(args.spec, fs::path(args.out));
  out << "generated " << manifest.videos().size() << " videos -> " << (fs::path(args.out) / "manifest.json").string()
      << '\n';
  return 0;
}

int cmd_selftest(const std::string& work_dir, bool fault_inject, const GlobalFlags& global, std::ostream& out) {
  SelftestOptions opts;
  opts.seed = global.seed;
  opts.threads = global.thread_count();
  opts.fault_inject = fault_inject;
  const bool scratch = work_dir.empty();
  opts.work_dir = scratch ? fs::temp_directory_path() /
                                ("mret-selftest-" + std::to_string(global.seed) + "-" + std::to_string(::getpid()))
                          : fs::path(work_dir);
  const auto result = run_selftest(opts);
  if (scratch) {
    std::error_code ec;
    fs::remove_all(opts.work_dir, ec);
  }
  out << "selftest seed " << global.seed << '\n' << result.log();
  return result.passed() ? 0 : 1;
}

void report_error(std::ostream& err, bool json, std::string_view kind, const std::string& message) {
  if (json) {
    nlohmann::json j{{"error", {{"kind", kind}, {"message", message}}}};
    err << j.dump() << '\n';
  } else {
    err << "error: " << message << '\n';
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moment-space motion embeddings and motion-centric retrieval benchmarks", "mret"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  GlobalFlags global;
  app.add_option("--threads", global.threads, "Worker threads (default: all cores); results do not depend on it");
  app.add_option("--seed", global.seed, "Seed for every random choice (default 7)");
  app.add_flag("--json-errors", global.json_errors, "Print errors to stderr as JSON objects");

  EmbedArgs embed;
  auto* embed_cmd = app.add_subcommand("embed", "Embed MVFT feature files into an MVIX index");
  embed_cmd->add_option("--features", embed.features, "Feature files or directories of *.mvft files")
      ->required()
      ->expected(1, -1);
  embed_cmd->add_option("--out", embed.out, "Output index path (.mvix)")->required();
  embed.config.attach(*embed_cmd);

  std::string info_index;
  bool info_ids = false;
  auto* info_cmd = app.add_subcommand("index-info", "Print the shape and config digest of an MVIX index");
  info_cmd->add_option("--index", info_index, "Index file (.mvix)")->required();
  info_cmd->add_flag("--ids", info_ids, "Also list every video id in index order");

  RetrieveArgs retrieve;
  auto* retrieve_cmd = app.add_subcommand("retrieve", "Rank candidates by cosine similarity to a query video");
  retrieve_cmd->add_option("--index", retrieve.index, "Index file (.mvix)")->required();
  retrieve_cmd->add_option("--query", retrieve.query, "Query video id")->required();
  retrieve_cmd->add_option("--pool", retrieve.pool, "Candidate ids, comma separated (default: whole index)")
      ->delimiter(',');
  retrieve_cmd->add_option("--pool-file", retrieve.pool_file, "File with one candidate id per line");
  retrieve_cmd->add_option("--top", retrieve.top, "Rows to print; 0 prints all (default 10)");

  HeatmapArgs heat;
  auto* heat_cmd = app.add_subcommand("heatmap", "Write the pairwise cosine-similarity matrix of an index");
  heat_cmd->add_option("--index", heat.index, "Index file (.mvix)")->required();
  heat_cmd->add_option("--ids", heat.ids, "Subset and order of ids, comma separated (default: index order)")
      ->delimiter(',');
  heat_cmd->add_option("--out", heat.out, "Output CSV path")->required();
  heat_cmd->add_option("--pgm", heat.pgm, "Optional 8-bit greyscale PGM image path");
  heat_cmd->add_option("--cell", heat.cell, "PGM pixels per matrix cell (default 8)");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Run a benchmark manifest and write JSON, CSV and Markdown reports");
  eval_cmd->add_option("--manifest", eval.manifest, "Benchmark manifest (JSON)")->required();
  eval.config.attach(*eval_cmd);
  eval_cmd->add_option("--knn", eval.knn, "Neighbors for labeled_knn manifests (default 20)");
  eval_cmd->add_flag("--no-clamp", eval.no_clamp, "Let negative similarities subtract in the weighted vote");
  eval_cmd->add_option("--sweep-frames", eval.sweep_frames, "Frame counts to sweep, comma separated")
      ->delimiter(',');
  eval_cmd->add_option("--frame-dir", eval.frame_dirs, "N=DIR feature directory for frame count N (repeatable)");
  eval_cmd->add_option("--sweep-configs", eval.sweep_configs,
                       "Configs to sweep as labels separated by ';', e.g. (1,0,0)-patch-concat, or 'standard'");
  eval_cmd->add_option("--out", eval.out, "Report path prefix (default: <manifest dir>/<manifest stem>.report)");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("gen-synth", "Generate a planted-signal dataset and its manifest");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--layout", synth.layout, "triplet or labeled (default triplet)");
  synth_cmd->add_option("--groups", synth.spec.groups, "Motion groups / classes (default 20)");
  synth_cmd->add_option("--per-group", synth.spec.per_group, "Videos per group (default 5)");
  synth_cmd->add_option("--frames", synth.spec.frames, "Frames per video (default 32)");
  synth_cmd->add_option("--patches", synth.spec.patches, "Patches per frame (default 16)");
  synth_cmd->add_option("--dim", synth.spec.dim, "Feature width (default 32)");
  synth_cmd->add_option("--appearance", synth.spec.appearance_confound, "Appearance amplitude (default 1.0)");
  synth_cmd->add_option("--motion", synth.spec.motion_signal, "Motion amplitude (default 1.0)");
  synth_cmd->add_option("--noise", synth.spec.noise, "Per-element noise amplitude (default 0.1)");
  synth_cmd->add_option("--styles", synth.spec.styles, "Appearance styles shared across classes, labeled layout (default 3)");

  std::string selftest_dir;
  bool fault_inject = false;
  auto* selftest_cmd = app.add_subcommand("selftest", "Generate planted data and run the end-to-end checks");
  selftest_cmd->add_option("--work-dir", selftest_dir, "Scratch directory (default: a temporary directory)");
  selftest_cmd->add_flag("--fault-inject", fault_inject, "Test hook: evaluate a broken config so the run must fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(e, out, err);
      return 0;
    }
    const bool json =
        std::any_of(argv + 1, argv + argc, [](const char* a) { return std::string_view(a) == "--json-errors"; });
    report_error(err, json, "usage", e.what());
    return 1;
  }

  try {
    if (*embed_cmd) return cmd_embed(embed, global, out, err);
    if (*info_cmd) return cmd_index_info(info_index, info_ids, out);
    if (*retrieve_cmd) return cmd_retrieve(retrieve, out);
    if (*heat_cmd) return cmd_heatmap(heat, out);
    if (*eval_cmd) return cmd_eval(eval, global, out, err);
    if (*synth_cmd) return cmd_gen_synth(synth, global, out);
    if (*selftest_cmd) return cmd_selftest(selftest_dir, fault_inject, global, out);
  } catch (const IoError& e) {
    report_error(err, global.json_errors, "io", e.what());
    return 2;
  } catch (const ContractError& e) {
    report_error(err, global.json_errors, "contract", e.what());
    return 1;
  } catch (const ValidationError& e) {
    report_error(err, global.json_errors, "validation", e.what());
    return 1;
  } catch (const Error& e) {
    report_error(err, global.json_errors, "error", e.what());
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    report_error(err, global.json_errors, "io", e.what());
    return 2;
  } catch (const std::exception& e) {
    report_error(err, global.json_errors, "internal", e.what());
    return 1;
  }
  return 1;
}

}  // namespace mret::cli
