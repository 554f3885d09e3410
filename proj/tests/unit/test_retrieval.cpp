#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "mret/errors.hpp"
#include "mret/retrieval.hpp"

using namespace mret;

namespace {

std::vector<MomentEmbedding> random_embeddings(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::normal_distribution<double> g;
  std::vector<MomentEmbedding> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = g(rng);
    out.push_back(fixtures::embedding_of("e" + std::to_string(i), v));
  }
  return out;
}

EmbeddingIndex index2(std::vector<std::pair<std::string, std::vector<double>>> rows) {
  std::vector<MomentEmbedding> e;
  for (auto& [id, v] : rows) e.push_back(fixtures::embedding_of(id, v));
  return build_index(e);
}

}  // namespace

TEST(BuildIndex, SingleRow) {
  const auto idx = index2({{"a", {3, 4}}});
  EXPECT_EQ(idx.size(), 1u);
  EXPECT_DOUBLE_EQ(idx.row(0)[0], 0.6);
  EXPECT_DOUBLE_EQ(idx.row(0)[1], 0.8);
}

TEST(BuildIndex, Errors) {
  std::vector<MomentEmbedding> e{fixtures::embedding_of("a", {1, 0}, "x"), fixtures::embedding_of("b", {0, 1}, "y")};
  EXPECT_THROW(build_index(e), ContractError);
  e[1].config_digest = "x";
  e[1].vector = {1, 0, 0};
  EXPECT_THROW(build_index(e), ContractError);
  e[1].vector = {0, 1};
  e[1].video_id = "a";
  EXPECT_THROW(build_index(e), ContractError);
  EXPECT_THROW(build_index({}), ContractError);
}

TEST(BuildIndex, RowsUnitNorm) {
  std::mt19937_64 rng(1);
  const auto idx = build_index(random_embeddings(rng, 100, 12));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto r = idx.row(i);
    EXPECT_NEAR(oracle::dot(r.data(), r.data(), r.size()), 1.0, 1e-12);
  }
}

TEST(Cosine, Basics) {
  const std::vector<double> v{0.6, 0.8}, neg{-0.6, -0.8}, e1{1, 0}, e2{0, 1};
  EXPECT_DOUBLE_EQ(cosine(v, v), 1.0);
  EXPECT_DOUBLE_EQ(cosine(v, neg), -1.0);
  EXPECT_EQ(cosine(e1, e2), 0.0);
  EXPECT_EQ(cosine(v, e1), cosine(e1, v));
  EXPECT_THROW(cosine(v, std::vector<double>{1, 0, 0}), ContractError);
}

TEST(Rank, ForcedOrdering) {
  const auto idx = index2({{"q", {1, 0}}, {"neg", {0.5, std::sqrt(0.75)}}, {"pos", {0.9, std::sqrt(1 - 0.81)}}});
  const auto r = rank(idx, "q");
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_EQ(r.entries[0].id, "pos");
  EXPECT_EQ(r.entries[1].id, "neg");
  EXPECT_EQ(r.query_id, "q");
}

TEST(Rank, TiesGoToInsertionOrder) {
  const auto idx = index2({{"q", {1, 1}}, {"b", {1, 0}}, {"a", {0, 1}}, {"c", {1, 0}}});
  const auto r = rank(idx, "q");
  EXPECT_EQ(r.entries[0].id, "b");
  EXPECT_EQ(r.entries[1].id, "a");
  EXPECT_EQ(r.entries[2].id, "c");
}

TEST(Rank, PoolAndErrors) {
  const auto idx = index2({{"q", {1, 0}}, {"a", {1, 1}}, {"b", {0, 1}}});
  const std::vector<std::string> pool{"b", "q", "b"};
  const auto r = rank(idx, "q", pool);
  ASSERT_EQ(r.entries.size(), 1u);
  EXPECT_EQ(r.entries[0].id, "b");
  EXPECT_THROW(rank(idx, "zz"), ContractError);
  const std::vector<std::string> bad{"a", "nope"};
  EXPECT_THROW(rank(idx, "q", bad), ContractError);
}

TEST(Rank, BruteForceOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto idx = build_index(random_embeddings(rng, 50, 8));
    std::vector<std::size_t> all(idx.size());
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t q = 0; q < idx.size(); q += 7) {
      const auto got = rank(idx, idx.ids()[q]);
      const auto want = oracle::rank(idx.matrix(), idx.dim(), q, all);
      ASSERT_EQ(got.entries.size(), want.size());
      for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_EQ(got.entries[i].id, idx.ids()[want[i].row]);
        EXPECT_EQ(got.entries[i].score, want[i].score);
      }
    }
  }
}

TEST(Rank, ScaleInvariance) {
  std::mt19937_64 rng(3);
  auto e = random_embeddings(rng, 30, 6);
  const auto a = build_index(e);
  for (auto& x : e) {
    for (auto& v : x.vector) v *= 4.0;
  }
  const auto b = build_index(e);
  for (std::size_t q = 0; q < a.size(); ++q) {
    const auto ra = rank(a, a.ids()[q]), rb = rank(b, b.ids()[q]);
    for (std::size_t i = 0; i < ra.entries.size(); ++i) EXPECT_EQ(ra.entries[i].id, rb.entries[i].id);
  }
}

TEST(Triplet, Examples) {
  const auto idx = index2({{"q", {1, 0}}, {"pos", {0.99, 0.14}}, {"neg", {0, 1}}, {"copy", {1, 0}}, {"orth", {0, 1}}});
  const std::vector<std::string> pool{"pos", "neg"};
  EXPECT_TRUE(triplet_success(idx, "q", "pos", pool));
  const std::vector<std::string> pool2{"copy", "neg"};
  EXPECT_TRUE(triplet_success(idx, "q", "copy", pool2));
  const std::vector<std::string> pool3{"orth", "copy"};
  EXPECT_FALSE(triplet_success(idx, "q", "orth", pool3));
}

TEST(Mvix, RoundTrip) {
  std::mt19937_64 rng(4);
  const auto idx = build_index(random_embeddings(rng, 25, 9));
  std::stringstream ss;
  idx.save(ss);
  EXPECT_EQ(EmbeddingIndex::load(ss), idx);
  fixtures::TempDir dir("mvix");
  idx.save(dir / "i.mvix");
  EXPECT_EQ(EmbeddingIndex::load(dir / "i.mvix"), idx);
}

TEST(Mvix, RejectsCorruption) {
  const auto idx = index2({{"a", {1, 0}}, {"b", {0, 1}}});
  std::stringstream ss;
  idx.save(ss);
  const auto bytes = ss.str();
  for (std::size_t cut : {std::size_t{3}, std::size_t{10}, bytes.size() - 1}) {
    std::istringstream in(bytes.substr(0, cut));
    EXPECT_THROW(EmbeddingIndex::load(in), ValidationError) << cut;
  }
  auto scaled = bytes;
  scaled[scaled.size() - 1] ^= 0x10;  // perturb the last row's exponent
  std::istringstream in(scaled);
  EXPECT_THROW(EmbeddingIndex::load(in), ValidationError);
  std::istringstream extra(bytes + "x");
  EXPECT_THROW(EmbeddingIndex::load(extra), ValidationError);
}
