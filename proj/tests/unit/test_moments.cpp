#include <gtest/gtest.h>

#include <numeric>

#include "fixtures.hpp"
#include "mret/errors.hpp"
#include "mret/moments.hpp"

using namespace mret;

namespace {

FeatureTensor two_frames() {
  FeatureTensor t("two", 2, 1, 2);
  t.data = {1, 3, 3, 5};
  return t;
}

FeatureTensor constant(std::size_t T, std::size_t P, std::size_t d, double c) {
  FeatureTensor t("const", T, P, d);
  for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] = c + 0.25 * static_cast<double>(i % (P * d));
  return t;
}

void expect_close(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  const double floor = std::max(fixtures::max_abs(want), 1e-300);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_TRUE(fixtures::close_rel(got[i], want[i], tol, floor)) << i;
}

}  // namespace

TEST(TemporalMean, Midpoint) {
  EXPECT_EQ(temporal_mean(two_frames()).values, (std::vector<double>{2, 4}));
}

TEST(TemporalMean, ConstantTensor) {
  const auto t = constant(5, 3, 2, 1.5);
  const auto m = temporal_mean(t);
  for (std::size_t i = 0; i < m.values.size(); ++i) EXPECT_DOUBLE_EQ(m.values[i], t.data[i]);
}

TEST(TemporalMean, NaiveOracle) {
  std::mt19937_64 rng(1);
  const auto t = fixtures::random_tensor(rng, 7, 3, 5);
  expect_close(temporal_mean(t).values, oracle::patch_moment(fixtures::to_oracle(t), 1), 1e-12);
}

TEST(CentralMoment, Variance) {
  EXPECT_EQ(central_moment(two_frames(), 2).values, (std::vector<double>{1, 1}));
}

TEST(CentralMoment, SymmetricSkewIsZero) {
  FeatureTensor t("s", 4, 1, 3);
  t.data = {1, -2, 5, 3, 0, 2, -1, 4, -3, 1, 2, 0};  // frames pair up as v, 2mu - v around mu = (1,1,1)
  const auto m = central_moment(t, 3);
  for (double v : m.values) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(CentralMoment, ConstantIsZero) {
  const auto t = constant(6, 2, 3, -3.0);
  for (int k = 2; k <= 5; ++k)
    for (double v : central_moment(t, k).values) EXPECT_EQ(v, 0.0);
}

TEST(CentralMoment, OrderBelowTwoIsContractError) {
  EXPECT_THROW(central_moment(two_frames(), 1), ContractError);
  EXPECT_THROW(central_moment(two_frames(), 0), ContractError);
}

TEST(CentralMoment, NegativeDeviationsKeepSign) {
  FeatureTensor t("n", 3, 1, 1);
  t.data = {0, 0, 3};  // deviations -1,-1,2
  EXPECT_DOUBLE_EQ(central_moment(t, 3).values[0], (-1.0 - 1.0 + 8.0) / 3.0);
}

TEST(TemporalMoments, MatchesSingleOrderOps) {
  std::mt19937_64 rng(2);
  const auto t = fixtures::random_tensor(rng, 9, 4, 6);
  const auto all = temporal_moments(t, 4);
  ASSERT_EQ(all.size(), 4u);
  EXPECT_EQ(all[0].values, temporal_mean(t).values);
  for (int k = 2; k <= 4; ++k) expect_close(all[k - 1].values, central_moment(t, k).values, 1e-13);
}

TEST(SpatialAggregate, SinglePatchIsIdentity) {
  PatchMoments m{2, 1, 3, {1.5, -2, 7}};
  EXPECT_EQ(spatial_aggregate(m).vector, m.values);
  EXPECT_EQ(spatial_aggregate(m).order, 2);
}

TEST(SpatialAggregate, TwoPointMean) {
  PatchMoments m{1, 2, 3, {0, 0, 0, 2, 2, 2}};
  EXPECT_EQ(spatial_aggregate(m).vector, (std::vector<double>{1, 1, 1}));
}

TEST(SpatialAggregate, NaiveOracle) {
  std::mt19937_64 rng(4);
  PatchMoments m{1, 17, 9, {}};
  std::normal_distribution<double> n;
  for (int i = 0; i < 17 * 9; ++i) m.values.push_back(n(rng));
  expect_close(spatial_aggregate(m).vector, oracle::spatial_mean(m.values, 17, 9), 1e-12);
}

TEST(TemporalDifference, Arithmetic) {
  const auto d = temporal_difference(two_frames());
  EXPECT_EQ(d.frames, 1u);
  EXPECT_EQ(d.data, (std::vector<double>{2, 2}));
  EXPECT_EQ(d.video_id, "two#diff");
}

TEST(TemporalDifference, ConstantIsZero) {
  const auto d = temporal_difference(constant(4, 2, 2, 9.0));
  EXPECT_EQ(d.frames, 3u);
  for (double v : d.data) EXPECT_EQ(v, 0.0);
}

TEST(TemporalDifference, RampHasZeroVariance) {
  FeatureTensor t("ramp", 6, 2, 3);
  const std::vector<double> v{0.5, -1.0, 2.0, 0.25, 3.0, -0.75};
  for (std::size_t s = 0; s < 6; ++s)
    for (std::size_t i = 0; i < 6; ++i) t.data[s * 6 + i] = static_cast<double>(s) * v[i];
  const auto d = temporal_difference(t);
  for (std::size_t s = 0; s < d.frames; ++s)
    for (std::size_t i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(d.data[s * 6 + i], v[i]);
  const auto want = oracle::patch_moment(fixtures::to_oracle(d), 2);
  for (double x : central_moment(d, 2).values) EXPECT_NEAR(x, 0.0, 1e-24);
  for (double x : want) EXPECT_NEAR(x, 0.0, 1e-24);
}

TEST(TemporalDifference, SingleFrameIsContractError) {
  FeatureTensor t("one", 1, 2, 2);
  try {
    temporal_difference(t);
    FAIL();
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("patch_diff requires at least 2 frames"), std::string::npos);
  }
}

TEST(FrameCollapse, SinglePatchIsIdentity) {
  std::mt19937_64 rng(6);
  const auto t = fixtures::random_tensor(rng, 5, 1, 4);
  const auto c = frame_collapse(t);
  EXPECT_EQ(c.data, t.data);
  EXPECT_EQ(c.patches, 1u);
}

TEST(FrameCollapse, PatchMean) {
  FeatureTensor t("f", 1, 2, 2);
  t.data = {0, 0, 2, 4};
  EXPECT_EQ(frame_collapse(t).data, (std::vector<double>{1, 2}));
}

TEST(FrameCollapse, Linearity) {
  std::mt19937_64 rng(8);
  const auto t = fixtures::random_tensor(rng, 7, 6, 5);
  expect_close(temporal_mean(frame_collapse(t)).values, spatial_aggregate(temporal_mean(t)).vector, 1e-12);
}

TEST(Embedding, ConcatDimension) {
  FeatureTensor t("wide", 2, 1, 768);
  for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] = std::sin(static_cast<double>(i));
  const auto e = compute_embedding(t, MomentConfig{});
  EXPECT_EQ(e.vector.size(), 2304u);
  EXPECT_TRUE(e.normalized);
  EXPECT_EQ(e.config_digest, MomentConfig{}.digest());
}

TEST(Embedding, SumDimension) {
  std::mt19937_64 rng(10);
  MomentConfig cfg;
  cfg.fusion = Fusion::kSum;
  EXPECT_EQ(compute_embedding(fixtures::random_tensor(rng, 4, 3, 7), cfg).vector.size(), 7u);
}

TEST(Embedding, ConstantVideoMeanOnly) {
  const auto t = constant(4, 3, 4, 2.0);
  MomentConfig cfg;
  cfg.weights = {1, 0, 0};
  const auto e = compute_embedding(t, cfg);
  const auto mean = spatial_aggregate(temporal_mean(t)).vector;
  const double n = oracle::norm2(mean);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(e.vector[c], mean[c] / n, 1e-12);
  for (std::size_t c = 4; c < 12; ++c) EXPECT_EQ(e.vector[c], 0.0);

  cfg.weights = {0, 1, 0};
  try {
    compute_embedding(t, cfg);
    FAIL();
  } catch (const DegenerateEmbeddingError& e) {
    EXPECT_NE(std::string(e.what()).find("const"), std::string::npos);
  }
}

TEST(Embedding, UnitNorm) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 50; ++i) {
    const auto e = compute_embedding(fixtures::random_tensor(rng, 8, 4, 4), MomentConfig{});
    EXPECT_NEAR(oracle::norm2(e.vector), 1.0, 1e-12);
  }
}

TEST(Embedding, StraightLineOracleUnderManyConfigs) {
  std::mt19937_64 rng(13);
  const std::vector<std::vector<double>> weights = {{1, 8, 4}, {1, 0, 0}, {0, 1, 0}, {1, 1, 1}, {2}, {1, 8}, {1, 2, 3, 4}};
  int cases = 0;
  for (const auto& w : weights)
    for (int level = 0; level < 3; ++level)
      for (int fusion = 0; fusion < 2; ++fusion)
        for (int norm = 0; norm < 2; ++norm) {
          MomentConfig cfg;
          cfg.weights = w;
          cfg.level = static_cast<Level>(level);
          cfg.fusion = static_cast<Fusion>(fusion);
          cfg.per_moment_normalize = norm == 1;
          auto t = fixtures::random_shape(rng, 10, 4, 5);
          if (t.frames < 3) t = fixtures::random_tensor(rng, 6, 3, 4, "v");
          const auto want = oracle::embedding(fixtures::to_oracle(t), w, level, fusion == 1, norm == 1);
          const auto got = compute_embedding(t, cfg);
          ASSERT_EQ(got.vector.size(), want.size());
          const double cos = oracle::dot(got.vector.data(), want.data(), want.size());
          EXPECT_LE(1.0 - cos, 1e-9) << cfg.label();
          ++cases;
        }
  EXPECT_EQ(cases, 84);
}

TEST(Embedding, PermutationInvariantAtPatchAndFrame) {
  std::mt19937_64 rng(14);
  const auto t = fixtures::random_tensor(rng, 12, 4, 6);
  auto shuffled = t;
  std::vector<std::size_t> perm(t.frames);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t s = 0; s < t.frames; ++s) {
    auto src = t.frame(perm[s]);
    std::copy(src.begin(), src.end(), shuffled.frame(s).begin());
  }
  for (auto level : {Level::kPatch, Level::kFrame}) {
    MomentConfig cfg;
    cfg.level = level;
    const auto a = compute_embedding(t, cfg).vector;
    const auto b = compute_embedding(shuffled, cfg).vector;
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
  }
  MomentConfig diff;
  diff.level = Level::kPatchDiff;
  const auto a = compute_embedding(t, diff).vector;
  const auto b = compute_embedding(shuffled, diff).vector;
  double gap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, std::abs(a[i] - b[i]));
  EXPECT_GT(gap, 1e-6);
}

TEST(Embedding, SingleOrderConcatEqualsSum) {
  std::mt19937_64 rng(15);
  const auto t = fixtures::random_tensor(rng, 6, 3, 5);
  MomentConfig c;
  c.weights = {3};
  MomentConfig s = c;
  s.fusion = Fusion::kSum;
  EXPECT_EQ(compute_embedding(t, c).vector, compute_embedding(t, s).vector);
}

TEST(Embedding, PatchDiffNeedsTwoFrames) {
  FeatureTensor t("solo", 1, 2, 2);
  t.data = {1, 2, 3, 4};
  MomentConfig cfg;
  cfg.level = Level::kPatchDiff;
  EXPECT_THROW(compute_embedding(t, cfg), ContractError);
}

TEST(FrameIndices, Examples) {
  EXPECT_EQ(uniform_frame_indices(10, 4), (std::vector<std::size_t>{0, 3, 6, 9}));
  EXPECT_EQ(uniform_frame_indices(10, 1), (std::vector<std::size_t>{5}));
  EXPECT_EQ(uniform_frame_indices(5, 5), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(uniform_frame_indices(7, 2), (std::vector<std::size_t>{0, 6}));
}

TEST(FrameIndices, RoundHalfUp) {
  // 1 * 3 / 2 = 1.5 rounds to 2
  EXPECT_EQ(uniform_frame_indices(4, 3), (std::vector<std::size_t>{0, 2, 3}));
}

TEST(Subsample, IdentityAndErrors) {
  std::mt19937_64 rng(16);
  const auto t = fixtures::random_tensor(rng, 8, 2, 3);
  EXPECT_EQ(subsample_frames(t, 8), t);
  const auto s = subsample_frames(t, 3);
  ASSERT_EQ(s.frames, 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto want = t.frame(uniform_frame_indices(8, 3)[i]);
    EXPECT_TRUE(std::equal(want.begin(), want.end(), s.frame(i).begin()));
  }
  EXPECT_THROW(subsample_frames(t, 9), ContractError);
}
