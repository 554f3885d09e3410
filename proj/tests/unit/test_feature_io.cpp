#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "fixtures.hpp"
#include "mret/errors.hpp"
#include "mret/feature_tensor.hpp"

using namespace mret;

namespace {

std::string encode(const FeatureTensor& t) {
  std::ostringstream os;
  write_feature_file(t, os);
  return os.str();
}

ParseErrorKind parse_kind(const std::string& bytes) {
  std::istringstream in(bytes);
  try {
    read_feature_file(in);
  } catch (const ParseError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "stream was accepted";
  return ParseErrorKind::kBadMagic;
}

void put32(std::string& s, std::size_t off, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s[off + i] = static_cast<char>((v >> (8 * i)) & 0xff);
}

}  // namespace

TEST(FeatureIo, SmallestTensorLayout) {
  FeatureTensor t("a", 1, 1, 2);
  t.data = {1.0, 2.0};
  const auto bytes = encode(t);
  ASSERT_EQ(bytes.size(), 24u + 1u + 8u);
  EXPECT_EQ(bytes.substr(0, 4), "MVFT");
  EXPECT_EQ(oracle::le32(bytes, 4), 1u);
  EXPECT_EQ(oracle::le32(bytes, 8), 1u);
  EXPECT_EQ(oracle::le32(bytes, 12), 1u);
  EXPECT_EQ(oracle::le32(bytes, 16), 2u);
  EXPECT_EQ(oracle::le32(bytes, 20), 1u);
  EXPECT_EQ(bytes[24], 'a');
  EXPECT_EQ(oracle::le32(bytes, 25), 0x3f800000u);
  EXPECT_EQ(oracle::le32(bytes, 29), 0x40000000u);
}

TEST(FeatureIo, ByteCountMatchesSize) {
  FeatureTensor t("clip", 3, 2, 5);
  std::ostringstream os;
  EXPECT_EQ(write_feature_file(t, os), 24u + 4u + 4u * 30u);
  EXPECT_EQ(feature_file_size(t), os.str().size());
}

TEST(FeatureIo, PayloadArithmeticAtBackboneScale) {
  FeatureTensor t("x", 32, 256, 768);
  EXPECT_EQ(feature_file_size(t) - 24 - 1, 25'165'824u);
}

TEST(FeatureIo, NanIsRejectedBeforeWriting) {
  FeatureTensor t("a", 1, 1, 2);
  t.data = {1.0, std::nan("")};
  std::ostringstream os;
  EXPECT_THROW(write_feature_file(t, os), ValidationError);
  EXPECT_TRUE(os.str().empty());
}

TEST(FeatureIo, FloatOverflowIsRejected) {
  FeatureTensor t("a", 1, 1, 1);
  t.data = {1e300};
  std::ostringstream os;
  EXPECT_THROW(write_feature_file(t, os), ValidationError);
  EXPECT_TRUE(os.str().empty());
}

TEST(FeatureIo, RoundTripProperty) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    auto t = fixtures::random_shape(rng, 9, 5, 7);
    t.video_id = "vid_" + std::to_string(i) + "_\xc3\xa9";
    const auto bytes = encode(t);
    std::istringstream in(bytes);
    const auto back = read_feature_file(in);
    ASSERT_EQ(back, t);
    EXPECT_EQ(encode(back), bytes);
  }
}

TEST(FeatureIo, FileRoundTrip) {
  fixtures::TempDir dir("fio");
  std::mt19937_64 rng(3);
  const auto t = fixtures::random_tensor(rng, 4, 3, 2, "on_disk");
  write_feature_file(t, dir / "a.mvft");
  EXPECT_EQ(read_feature_file(dir / "a.mvft"), t);
  const auto h = read_feature_header(dir / "a.mvft");
  EXPECT_EQ(h.frames, 4u);
  EXPECT_EQ(h.patches, 3u);
  EXPECT_EQ(h.dim, 2u);
  EXPECT_EQ(h.video_id, "on_disk");
}

TEST(FeatureIo, MissingFileIsIoError) {
  EXPECT_THROW(read_feature_file(std::filesystem::path("/nonexistent/x.mvft")), IoError);
}

TEST(FeatureIo, DistinctParseErrors) {
  FeatureTensor t("abc", 2, 2, 2);
  const auto good = encode(t);

  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_EQ(parse_kind(bad_magic), ParseErrorKind::kBadMagic);

  auto bad_version = good;
  put32(bad_version, 4, 2);
  EXPECT_EQ(parse_kind(bad_version), ParseErrorKind::kUnsupportedVersion);

  EXPECT_EQ(parse_kind(good.substr(0, 10)), ParseErrorKind::kTruncatedHeader);
  EXPECT_EQ(parse_kind(good.substr(0, good.size() - 4)), ParseErrorKind::kTruncatedPayload);
  EXPECT_EQ(parse_kind(good + "x"), ParseErrorKind::kShapeMismatch);

  auto zero_dim = good;
  put32(zero_dim, 16, 0);
  EXPECT_EQ(parse_kind(zero_dim), ParseErrorKind::kInvalidShape);

  auto huge = good;
  put32(huge, 8, 0xffffffffu);
  put32(huge, 12, 0xffffffffu);
  put32(huge, 16, 0xffffffffu);
  const auto k = parse_kind(huge);
  EXPECT_TRUE(k == ParseErrorKind::kShapeMismatch || k == ParseErrorKind::kTruncatedPayload);

  auto bad_id = good;
  bad_id[24] = static_cast<char>(0xff);
  EXPECT_EQ(parse_kind(bad_id), ParseErrorKind::kInvalidId);

  auto inf = good;
  put32(inf, 24 + 3, 0x7f800000u);
  EXPECT_EQ(parse_kind(inf), ParseErrorKind::kNonFinite);
}

TEST(FeatureIo, ParseErrorsNameTheirKind) {
  std::istringstream in("NOPE");
  try {
    read_feature_file(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos);
  }
}

TEST(Validate, AllZeros) {
  FeatureTensor t("z", 2, 2, 2);
  const auto d = validate(t);
  EXPECT_TRUE(d.finite);
  EXPECT_EQ(d.min, 0.0);
  EXPECT_EQ(d.max, 0.0);
  EXPECT_EQ(d.mean, 0.0);
  EXPECT_TRUE(d.issues.empty());
}

TEST(Validate, OneInfNamesFlatIndex) {
  FeatureTensor t("z", 2, 2, 2);
  t.data[5] = std::numeric_limits<double>::infinity();
  const auto d = validate(t);
  EXPECT_FALSE(d.finite);
  ASSERT_EQ(d.issues.size(), 1u);
  EXPECT_NE(d.issues[0].find("5"), std::string::npos);
}

TEST(Validate, RandomTensorAgainstScan) {
  std::mt19937_64 rng(5);
  const auto t = fixtures::random_tensor(rng, 6, 4, 3);
  const auto d = validate(t);
  EXPECT_TRUE(d.ok());
  double lo = t.data[0], hi = t.data[0], sum = 0.0;
  for (double v : t.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  EXPECT_EQ(d.min, lo);
  EXPECT_EQ(d.max, hi);
  EXPECT_NEAR(d.mean, sum / static_cast<double>(t.data.size()), 1e-12);
}

TEST(Validate, ShapeAndIdIssues) {
  FeatureTensor t("", 2, 2, 2);
  t.data.pop_back();
  EXPECT_GE(validate(t).issues.size(), 2u);
  EXPECT_THROW(t.check(), ValidationError);
}

TEST(Utf8, MatchesOracle) {
  const std::vector<std::string> cases = {"plain",         "\xc3\xa9",      "\xe2\x82\xac", "\xf0\x9f\x8e\xac",
                                          "\xc0\xaf",      "\xed\xa0\x80",  "\xf4\x90\x80\x80", "\xe2\x82",
                                          "\x80",          "\xf5\x80\x80\x80"};
  for (const auto& s : cases) EXPECT_EQ(is_valid_utf8(s), oracle::utf8_ok(s)) << s;
  std::mt19937_64 rng(9);
  for (int i = 0; i < 5000; ++i) {
    std::string s(rng() % 6, '\0');
    for (auto& c : s) c = static_cast<char>(rng() & 0xff);
    ASSERT_EQ(is_valid_utf8(s), oracle::utf8_ok(s));
  }
}
