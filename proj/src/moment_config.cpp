#include "mret/moment_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>

#include "mret/errors.hpp"

namespace mret {

std::string_view to_string(Level level) noexcept {
  switch (level) {
    case Level::kPatch: return "patch";
    case Level::kFrame: return "frame";
    case Level::kPatchDiff: return "patch_diff";
  }
  return "patch";
}

std::string_view to_string(Fusion fusion) noexcept {
  return fusion == Fusion::kSum ? "sum" : "concat";
}

Level parse_level(std::string_view text) {
  if (text == "patch") return Level::kPatch;
  if (text == "frame") return Level::kFrame;
  if (text == "patch_diff" || text == "diff-patch" || text == "diff") return Level::kPatchDiff;
  throw ValidationError("unknown level '" + std::string(text) + "' (patch, frame, patch_diff)");
}

Fusion parse_fusion(std::string_view text) {
  if (text == "concat") return Fusion::kConcat;
  if (text == "sum") return Fusion::kSum;
  throw ValidationError("unknown fusion '" + std::string(text) + "' (concat, sum)");
}

std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) return std::to_string(value);
  return std::string(buf, end);
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void MomentConfig::check() const {
  if (weights.empty()) throw ValidationError("moment config needs at least one order");
  bool any = false;
  for (double w : weights) {
    if (!std::isfinite(w)) throw ValidationError("moment weights must be finite");
    any = any || w != 0.0;
  }
  if (!any) throw ValidationError("at least one moment weight must be non-zero");
  if (frames == 0) throw ValidationError("frames must be >= 1");
}

namespace {

std::string join_weights(const std::vector<double>& weights) {
  std::string out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (i) out += ',';
    out += format_number(weights[i]);
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\n' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view text) {
  text = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::size_t parse_count(std::string_view text) {
  text = trim(text);
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError("not a non-negative integer: '" + std::string(text) + "'");
  }
  return v;
}

bool parse_bool(std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ValidationError("not a boolean: '" + std::string(text) + "'");
}

std::vector<double> parse_weight_list(std::string_view text) {
  std::vector<double> out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(parse_double(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

std::string MomentConfig::canonical() const {
  std::string out;
  out += "orders=" + std::to_string(orders());
  out += ";weights=" + join_weights(weights);
  out += ";level=" + std::string(to_string(level));
  out += ";fusion=" + std::string(to_string(fusion));
  out += ";per_moment_normalize=";
  out += per_moment_normalize ? "true" : "false";
  out += ";frames=" + std::to_string(frames);
  return out;
}

MomentConfig MomentConfig::parse(std::string_view text) {
  MomentConfig cfg;
  std::size_t declared_orders = 0;
  bool have_orders = false;
  text = trim(text);
  while (!text.empty()) {
    const auto semi = text.find(';');
    const auto item = trim(text.substr(0, semi));
    text = semi == std::string_view::npos ? std::string_view{} : text.substr(semi + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ValidationError("config item without '=': '" + std::string(item) + "'");
    const auto key = trim(item.substr(0, eq));
    const auto value = trim(item.substr(eq + 1));
    if (key == "orders") {
      declared_orders = parse_count(value);
      have_orders = true;
    } else if (key == "weights") {
      cfg.weights = parse_weight_list(value);
    } else if (key == "level") {
      cfg.level = parse_level(value);
    } else if (key == "fusion") {
      cfg.fusion = parse_fusion(value);
    } else if (key == "per_moment_normalize") {
      cfg.per_moment_normalize = parse_bool(value);
    } else if (key == "frames") {
      cfg.frames = parse_count(value);
    } else {
      throw ValidationError("unknown config key '" + std::string(key) + "'");
    }
  }
  if (have_orders && declared_orders != cfg.weights.size()) {
    throw ValidationError("orders=" + std::to_string(declared_orders) + " but " +
                          std::to_string(cfg.weights.size()) + " weights given");
  }
  cfg.check();
  return cfg;
}

std::string MomentConfig::digest() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

std::string MomentConfig::label() const {
  std::string out = "(" + join_weights(weights) + ")-";
  switch (level) {
    case Level::kPatch: out += "patch"; break;
    case Level::kFrame: out += "frame"; break;
    case Level::kPatchDiff: out += "diff-patch"; break;
  }
  out += "-";
  out += to_string(fusion);
  if (!per_moment_normalize) out += "-raw";
  return out;
}

MomentConfig MomentConfig::from_label(std::string_view label, const MomentConfig& base) {
  const std::string original(label);
  label = trim(label);
  const auto open = label.find('(');
  const auto close = label.find(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw ValidationError("config label must look like (a1,a2,...)-level-fusion: '" + original + "'");
  }
  MomentConfig cfg = base;
  cfg.weights = parse_weight_list(label.substr(open + 1, close - open - 1));
  auto rest = label.substr(close + 1);
  if (rest.empty() || rest.front() != '-') {
    throw ValidationError("config label missing level/fusion: '" + original + "'");
  }
  rest.remove_prefix(1);
  if (rest.ends_with("-raw")) {
    cfg.per_moment_normalize = false;
    rest.remove_suffix(4);
  }
  const auto dash = rest.rfind('-');
  if (dash == std::string_view::npos) {
    throw ValidationError("config label missing fusion: '" + original + "'");
  }
  cfg.level = parse_level(rest.substr(0, dash));
  cfg.fusion = parse_fusion(rest.substr(dash + 1));
  cfg.check();
  return cfg;
}

MomentConfig MomentConfig::from_label(std::string_view label) { return from_label(label, MomentConfig{}); }

}  // namespace mret
