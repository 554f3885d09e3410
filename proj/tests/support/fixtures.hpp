#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "mret/feature_tensor.hpp"
#include "mret/moments.hpp"
#include "oracles.hpp"

namespace fixtures {

inline mret::FeatureTensor random_tensor(std::mt19937_64& rng, std::size_t T, std::size_t P, std::size_t d,
                                         std::string id = "v", double scale = 1.0) {
  mret::FeatureTensor t(std::move(id), T, P, d);
  std::normal_distribution<double> n(0.0, scale);
  for (auto& v : t.data) v = static_cast<double>(static_cast<float>(n(rng)));
  return t;
}

inline mret::FeatureTensor random_shape(std::mt19937_64& rng, std::size_t max_t, std::size_t max_p,
                                         std::size_t max_d) {
  std::uniform_int_distribution<std::size_t> tt(1, max_t), pp(1, max_p), dd(1, max_d);
  const auto T = tt(rng), P = pp(rng), d = dd(rng);
  std::uniform_real_distribution<double> sc(0.1, 10.0);
  return random_tensor(rng, T, P, d, "v", sc(rng));
}

inline oracle::Tensor to_oracle(const mret::FeatureTensor& t) { return {t.frames, t.patches, t.dim, t.data}; }

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// |a - b| relative to max(|b|, floor); floor guards entries that are ~0.
inline bool close_rel(double a, double b, double tol, double floor) {
  return std::abs(a - b) <= tol * std::max(std::abs(b), floor);
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("mret-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline mret::MomentEmbedding embedding_of(std::string id, std::vector<double> v, std::string digest = "d") {
  return {std::move(id), std::move(v), std::move(digest), false};
}

}  // namespace fixtures
