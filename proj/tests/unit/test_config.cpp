#include <gtest/gtest.h>

#include "mret/errors.hpp"
#include "mret/moment_config.hpp"

using namespace mret;

TEST(MomentConfig, CanonicalDefault) {
  EXPECT_EQ(MomentConfig{}.canonical(),
            "orders=3;weights=1,8,4;level=patch;fusion=concat;per_moment_normalize=true;frames=32");
}

TEST(MomentConfig, ParseRoundTrip) {
  MomentConfig c;
  c.weights = {0.5, 2, 1e-3};
  c.level = Level::kPatchDiff;
  c.fusion = Fusion::kSum;
  c.per_moment_normalize = false;
  c.frames = 16;
  EXPECT_EQ(MomentConfig::parse(c.canonical()), c);
  EXPECT_EQ(MomentConfig::parse(c.canonical()).digest(), c.digest());
}

TEST(MomentConfig, ParseKeepsDefaultsForMissingKeys) {
  const auto c = MomentConfig::parse("level=frame");
  EXPECT_EQ(c.level, Level::kFrame);
  EXPECT_EQ(c.weights, (std::vector<double>{1, 8, 4}));
}

TEST(MomentConfig, ParseRejects) {
  EXPECT_THROW(MomentConfig::parse("orders=2;weights=1,8,4"), ValidationError);
  EXPECT_THROW(MomentConfig::parse("weights=0,0,0"), ValidationError);
  EXPECT_THROW(MomentConfig::parse("colour=blue"), ValidationError);
  EXPECT_THROW(MomentConfig::parse("level=voxel"), ValidationError);
  EXPECT_THROW(MomentConfig::parse("frames=0"), ValidationError);
  EXPECT_THROW(MomentConfig::parse("weights=1,nan"), ValidationError);
}

TEST(MomentConfig, DigestIsFnvOfCanonical) {
  const MomentConfig c;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(c.canonical())));
  EXPECT_EQ(c.digest(), buf);
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  MomentConfig other;
  other.frames = 16;
  EXPECT_NE(other.digest(), c.digest());
}

TEST(MomentConfig, AblationLabels) {
  const std::vector<std::vector<double>> ws = {{1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {1, 8, 0}, {1, 1, 1}, {1, 8, 4}};
  const std::vector<std::pair<Level, std::string>> levels = {
      {Level::kPatch, "patch"}, {Level::kFrame, "frame"}, {Level::kPatchDiff, "diff-patch"}};
  const std::vector<std::pair<Fusion, std::string>> fusions = {{Fusion::kConcat, "concat"}, {Fusion::kSum, "sum"}};
  for (const auto& w : ws)
    for (const auto& [level, ltext] : levels)
      for (const auto& [fusion, ftext] : fusions) {
        MomentConfig c;
        c.weights = w;
        c.level = level;
        c.fusion = fusion;
        std::string want = "(";
        for (std::size_t i = 0; i < w.size(); ++i) want += (i ? "," : "") + std::to_string(static_cast<int>(w[i]));
        want += ")-" + ltext + "-" + ftext;
        EXPECT_EQ(c.label(), want);
        EXPECT_EQ(MomentConfig::from_label(want), c);
      }
}

TEST(MomentConfig, RawLabelSuffix) {
  MomentConfig c;
  c.per_moment_normalize = false;
  EXPECT_EQ(c.label(), "(1,8,4)-patch-concat-raw");
  EXPECT_EQ(MomentConfig::from_label(c.label()), c);
}

TEST(MomentConfig, FromLabelTakesBase) {
  MomentConfig base;
  base.frames = 8;
  const auto c = MomentConfig::from_label("(1,0,0)-frame-sum", base);
  EXPECT_EQ(c.frames, 8u);
  EXPECT_EQ(c.level, Level::kFrame);
  EXPECT_THROW(MomentConfig::from_label("1,8,4-patch-concat"), ValidationError);
  EXPECT_THROW(MomentConfig::from_label("(1,8,4)-patch"), ValidationError);
}

TEST(MomentConfig, FormatNumber) {
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-8), "-8");
}
