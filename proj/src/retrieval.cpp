#include "mret/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "binary_io.hpp"
#include "mret/errors.hpp"

namespace mret {

namespace {

constexpr double kUnitTolerance = 1e-6;

void normalize_rows(std::vector<double>& matrix, std::size_t dim, const std::vector<std::string>& ids) {
  for (std::size_t r = 0; r < ids.size(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < dim; ++c) s += matrix[r * dim + c] * matrix[r * dim + c];
    const double norm = std::sqrt(s);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw ValidationError("embedding '" + ids[r] + "' has zero or non-finite norm");
    }
    for (std::size_t c = 0; c < dim; ++c) matrix[r * dim + c] /= norm;
  }
}

}  // namespace

std::optional<std::size_t> EmbeddingIndex::find(std::string_view id) const {
  auto it = lookup_.find(std::string(id));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingIndex::row_of(std::string_view id) const {
  if (auto r = find(id)) return *r;
  throw ContractError("unknown video id '" + std::string(id) + "'");
}

EmbeddingIndex EmbeddingIndex::from_rows(std::vector<std::string> ids, std::vector<double> matrix,
                                         std::size_t dim, std::string digest) {
  if (ids.empty()) throw ContractError("cannot build an empty index");
  if (dim == 0) throw ContractError("index dimension must be >= 1");
  if (matrix.size() != ids.size() * dim) throw ContractError("index matrix size does not match N*D");
  EmbeddingIndex idx;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!idx.lookup_.emplace(ids[i], i).second) {
      throw ContractError("duplicate video id '" + ids[i] + "' in index");
    }
  }
  normalize_rows(matrix, dim, ids);
  idx.ids_ = std::move(ids);
  idx.matrix_ = std::move(matrix);
  idx.dim_ = dim;
  idx.digest_ = std::move(digest);
  return idx;
}

EmbeddingIndex build_index(std::span<const MomentEmbedding> embeddings) {
  if (embeddings.empty()) throw ContractError("cannot build an empty index");
  const auto dim = embeddings.front().vector.size();
  const auto& digest = embeddings.front().config_digest;
  std::vector<std::string> ids;
  std::vector<double> matrix;
  ids.reserve(embeddings.size());
  matrix.reserve(embeddings.size() * dim);
  for (const auto& e : embeddings) {
    if (e.vector.size() != dim) {
      throw ContractError("dimension mismatch: '" + e.video_id + "' has " + std::to_string(e.vector.size()) +
                          ", expected " + std::to_string(dim));
    }
    if (e.config_digest != digest) {
      throw ContractError("config digest mismatch: '" + e.video_id + "' has " + e.config_digest +
                          ", expected " + digest);
    }
    ids.push_back(e.video_id);
    matrix.insert(matrix.end(), e.vector.begin(), e.vector.end());
  }
  return EmbeddingIndex::from_rows(std::move(ids), std::move(matrix), dim, digest);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ContractError("cosine: dimension mismatch " + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<ScoredRow> rank_rows(const EmbeddingIndex& index, std::size_t query_row,
                                 std::span<const std::size_t> candidates) {
  std::vector<std::size_t> rows(candidates.begin(), candidates.end());
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  const auto query = index.row(query_row);
  std::vector<ScoredRow> out;
  out.reserve(rows.size());
  for (auto r : rows) {
    if (r == query_row) continue;
    if (r >= index.size()) throw ContractError("candidate row out of range");
    out.push_back({r, cosine(query, index.row(r))});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ScoredRow& a, const ScoredRow& b) { return a.score > b.score; });
  return out;
}

RankedList rank(const EmbeddingIndex& index, std::string_view query_id,
                std::optional<std::span<const std::string>> pool) {
  const auto q = index.row_of(query_id);
  std::vector<std::size_t> candidates;
  if (pool) {
    candidates.reserve(pool->size());
    for (const auto& id : *pool) {
      auto r = index.find(id);
      if (!r) throw ContractError("pool member '" + id + "' is not in the index");
      candidates.push_back(*r);
    }
  } else {
    candidates.resize(index.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i] = i;
  }
  RankedList out;
  out.query_id = std::string(query_id);
  for (const auto& sr : rank_rows(index, q, candidates)) {
    out.entries.push_back({index.ids()[sr.row], sr.score});
  }
  return out;
}

bool triplet_success(const EmbeddingIndex& index, std::string_view query_id,
                     std::string_view positive_id, std::span<const std::string> pool) {
  if (std::find(pool.begin(), pool.end(), positive_id) == pool.end()) {
    throw ContractError("positive '" + std::string(positive_id) + "' is not in the pool");
  }
  const auto ranked = rank(index, query_id, pool);
  return !ranked.entries.empty() && ranked.entries.front().id == positive_id;
}

void EmbeddingIndex::save(std::ostream& out) const {
  std::string buf;
  buf.append(kIndexMagic, 4);
  detail::put_u32(buf, kIndexVersion);
  detail::put_u32(buf, static_cast<std::uint32_t>(size()));
  detail::put_u32(buf, static_cast<std::uint32_t>(dim_));
  detail::put_u32(buf, static_cast<std::uint32_t>(digest_.size()));
  buf.append(digest_);
  for (const auto& id : ids_) {
    detail::put_u32(buf, static_cast<std::uint32_t>(id.size()));
    buf.append(id);
  }
  for (double v : matrix_) detail::put_f64(buf, v);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  out.flush();
  if (!out) throw IoError("failed writing index stream");
}

void EmbeddingIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  save(out);
}

EmbeddingIndex EmbeddingIndex::load(std::istream& in) {
  const auto fixed = detail::read_up_to(in, 20);
  const auto magic_len = std::min<std::size_t>(fixed.size(), 4);
  if (fixed.compare(0, magic_len, kIndexMagic, magic_len) != 0) {
    throw ParseError(ParseErrorKind::kBadMagic, "stream does not start with MVIX");
  }
  if (fixed.size() < 20) throw ParseError(ParseErrorKind::kTruncatedHeader, "index header too short");
  const auto* p = reinterpret_cast<const unsigned char*>(fixed.data());
  const auto version = detail::get_u32(p + 4);
  if (version != kIndexVersion) {
    throw ParseError(ParseErrorKind::kUnsupportedVersion, "index version " + std::to_string(version));
  }
  const std::uint64_t n = detail::get_u32(p + 8);
  const std::uint64_t d = detail::get_u32(p + 12);
  const auto digest_len = detail::get_u32(p + 16);
  if (n == 0 || d == 0) throw ParseError(ParseErrorKind::kInvalidShape, "index with zero rows or columns");
  if (d > (std::numeric_limits<std::uint64_t>::max() / 8) / n) {
    throw ParseError(ParseErrorKind::kShapeMismatch, "declared index shape exceeds addressable size");
  }
  auto digest = detail::read_up_to(in, digest_len);
  if (digest.size() < digest_len) throw ParseError(ParseErrorKind::kTruncatedHeader, "digest block truncated");

  std::vector<std::string> ids;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto len_bytes = detail::read_up_to(in, 4);
    if (len_bytes.size() < 4) throw ParseError(ParseErrorKind::kTruncatedHeader, "ids block truncated");
    const auto len = detail::get_u32(reinterpret_cast<const unsigned char*>(len_bytes.data()));
    if (len == 0) throw ParseError(ParseErrorKind::kInvalidId, "empty id in index");
    auto id = detail::read_up_to(in, len);
    if (id.size() < len) throw ParseError(ParseErrorKind::kTruncatedHeader, "ids block truncated");
    if (!is_valid_utf8(id)) throw ParseError(ParseErrorKind::kInvalidId, "index id is not UTF-8");
    ids.push_back(std::move(id));
  }
  const auto payload = detail::read_up_to(in, n * d * 8);
  if (payload.size() < n * d * 8) throw ParseError(ParseErrorKind::kTruncatedPayload, "index matrix truncated");
  if (!detail::at_eof(in)) throw ParseError(ParseErrorKind::kShapeMismatch, "bytes remain after index matrix");

  std::vector<double> matrix(static_cast<std::size_t>(n * d));
  const auto* m = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    matrix[i] = detail::get_f64(m + 8 * i);
    if (!std::isfinite(matrix[i])) throw ParseError(ParseErrorKind::kNonFinite, "index matrix entry " + std::to_string(i));
  }
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += matrix[r * d + c] * matrix[r * d + c];
    if (std::abs(std::sqrt(s) - 1.0) > kUnitTolerance) {
      throw ValidationError("index row '" + ids[r] + "' is not unit-norm");
    }
  }
  // Rows were stored normalized; keep the stored bits as-is.
  EmbeddingIndex idx;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!idx.lookup_.emplace(ids[i], i).second) {
      throw ValidationError("duplicate id '" + ids[i] + "' in index file");
    }
  }
  idx.ids_ = std::move(ids);
  idx.matrix_ = std::move(matrix);
  idx.dim_ = static_cast<std::size_t>(d);
  idx.digest_ = std::move(digest);
  return idx;
}

EmbeddingIndex EmbeddingIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return load(in);
}

}  // namespace mret
