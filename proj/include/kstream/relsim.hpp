#pragma once
// Relational similarity from the contracted line graph.
//
// C[i][j] counts the unordered pairs of distinct edges that share an endpoint
// and carry labels {r_i, r_j}. Two same-label edges meeting at a node add to
// the diagonal. Rows are re-weighted with TF-IDF and compared by cosine.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kstream/error.hpp"
#include "kstream/graph.hpp"

namespace kstream {

class CooccurrenceMatrix {
 public:
  explicit CooccurrenceMatrix(std::size_t relations = 0)
      : size_(relations), counts_(relations * relations, 0) {}

  std::size_t size() const noexcept { return size_; }

  std::uint64_t at(RelationId i, RelationId j) const {
    return counts_[index(i, j)];
  }

  void add(RelationId i, RelationId j, std::uint64_t n) {
    counts_[index(i, j)] += n;
    if (i != j) counts_[index(j, i)] += n;
  }

  void subtract(RelationId i, RelationId j, std::uint64_t n) {
    counts_[index(i, j)] -= n;
    if (i != j) counts_[index(j, i)] -= n;
  }

  // Unordered pairs {i, j} (including i == j) with a positive count.
  std::size_t nonzero_pairs() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < size_; ++i)
      for (std::size_t j = i; j < size_; ++j)
        if (counts_[i * size_ + j] > 0) ++n;
    return n;
  }

  friend bool operator==(const CooccurrenceMatrix&,
                         const CooccurrenceMatrix&) = default;

 private:
  std::size_t index(RelationId i, RelationId j) const {
    if (i >= size_ || j >= size_) throw bad_input("relation id out of range");
    return static_cast<std::size_t>(i) * size_ + j;
  }

  std::size_t size_;
  std::vector<std::uint64_t> counts_;
};

inline CooccurrenceMatrix build_cooccurrence(const KnowledgeGraph& g) {
  CooccurrenceMatrix c(g.num_relations());
  std::vector<std::uint64_t> histogram(g.num_relations(), 0);
  std::vector<RelationId> touched;

  const auto accumulate = [&](std::span<const Incidence> incs, bool add) {
    touched.clear();
    for (const auto& inc : incs) {
      if (histogram[inc.relation]++ == 0) touched.push_back(inc.relation);
    }
    std::sort(touched.begin(), touched.end());
    for (std::size_t x = 0; x < touched.size(); ++x) {
      const auto ri = touched[x];
      const auto hi = histogram[ri];
      if (hi >= 2) {
        const auto n = hi * (hi - 1) / 2;
        add ? c.add(ri, ri, n) : c.subtract(ri, ri, n);
      }
      for (std::size_t y = x + 1; y < touched.size(); ++y) {
        const auto rj = touched[y];
        const auto n = hi * histogram[rj];
        add ? c.add(ri, rj, n) : c.subtract(ri, rj, n);
      }
    }
    for (auto r : touched) histogram[r] = 0;
  };

  std::vector<Incidence> sorted;
  std::vector<Incidence> group;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const auto incs = g.incident(v);
    accumulate(incs, true);

    // Parallel edges share both endpoints but are one adjacency of the line
    // graph; their pairs were already counted at the smaller endpoint.
    sorted.assign(incs.begin(), incs.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const Incidence& x, const Incidence& y) { return x.other < y.other; });
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j].other == sorted[i].other) ++j;
      if (j - i >= 2 && sorted[i].other < v) {
        group.assign(sorted.begin() + static_cast<std::ptrdiff_t>(i),
                     sorted.begin() + static_cast<std::ptrdiff_t>(j));
        accumulate(group, false);
      }
      i = j;
    }
  }
  return c;
}

class SimilarityModel {
 public:
  SimilarityModel() = default;
  SimilarityModel(std::size_t relations, std::vector<double> weighted)
      : size_(relations), weighted_(std::move(weighted)), norms_(relations, 0.0) {
    if (weighted_.size() != size_ * size_)
      throw bad_input("similarity matrix has the wrong number of entries");
    for (std::size_t i = 0; i < size_; ++i) {
      double sq = 0.0;
      for (std::size_t j = 0; j < size_; ++j) sq += sq_(weighted_[i * size_ + j]);
      norms_[i] = std::sqrt(sq);
    }
  }

  std::size_t size() const noexcept { return size_; }

  double weight(RelationId i, RelationId j) const {
    check(i);
    check(j);
    return weighted_[static_cast<std::size_t>(i) * size_ + j];
  }
  double row_norm(RelationId i) const {
    check(i);
    return norms_[i];
  }
  const std::vector<double>& weights() const noexcept { return weighted_; }

  // Cosine of rows i and j; 0 if either row is all zero.
  double similarity(RelationId i, RelationId j) const {
    check(i);
    check(j);
    if (norms_[i] == 0.0 || norms_[j] == 0.0) return 0.0;
    if (i == j) return 1.0;
    const double* a = &weighted_[static_cast<std::size_t>(i) * size_];
    const double* b = &weighted_[static_cast<std::size_t>(j) * size_];
    double dot = 0.0;
    for (std::size_t k = 0; k < size_; ++k) dot += a[k] * b[k];
    return dot / (norms_[i] * norms_[j]);
  }

  // u(r, p) for every relation r.
  std::vector<double> similarity_to(RelationId p) const {
    std::vector<double> row(size_);
    for (RelationId r = 0; r < size_; ++r) row[r] = similarity(r, p);
    return row;
  }

 private:
  static double sq_(double x) { return x * x; }
  void check(RelationId r) const {
    if (r >= size_) throw bad_input("unknown relation id " + std::to_string(r));
  }

  std::size_t size_ = 0;
  std::vector<double> weighted_;
  std::vector<double> norms_;
};

// TF = ln(1 + C_ij), IDF = ln(R / df_j) with df_j the number of rows having a
// positive entry in column j; a column with df_j = 0 is all zero.
inline SimilarityModel tfidf_transform(const CooccurrenceMatrix& c) {
  const std::size_t n = c.size();
  std::vector<double> idf(n, 0.0);
  for (RelationId j = 0; j < n; ++j) {
    std::size_t df = 0;
    for (RelationId i = 0; i < n; ++i)
      if (c.at(i, j) > 0) ++df;
    if (df > 0)
      idf[j] = std::log(static_cast<double>(n) / static_cast<double>(df));
  }
  std::vector<double> weighted(n * n, 0.0);
  for (RelationId i = 0; i < n; ++i)
    for (RelationId j = 0; j < n; ++j) {
      const auto count = c.at(i, j);
      if (count > 0)
        weighted[static_cast<std::size_t>(i) * n + j] =
            std::log1p(static_cast<double>(count)) * idf[j];
    }
  return SimilarityModel(n, std::move(weighted));
}

inline SimilarityModel build_similarity(const KnowledgeGraph& g) {
  return tfidf_transform(build_cooccurrence(g));
}

inline double relational_similarity(const SimilarityModel& m, RelationId i,
                                    RelationId j) {
  return m.similarity(i, j);
}

struct RankedRelation {
  RelationId relation;
  double similarity;
};

// The k relations most similar to r, excluding r; ties by id ascending.
inline std::vector<RankedRelation> top_k_similar(const SimilarityModel& m,
                                                 RelationId r, std::size_t k) {
  if (r >= m.size()) throw bad_input("unknown relation id " + std::to_string(r));
  if (k == 0) throw bad_input("k must be at least 1");
  std::vector<RankedRelation> all;
  all.reserve(m.size());
  for (RelationId other = 0; other < m.size(); ++other)
    if (other != r) all.push_back({other, m.similarity(other, r)});
  const auto keep = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep),
                    all.end(), [](const RankedRelation& a, const RankedRelation& b) {
                      if (a.similarity != b.similarity)
                        return a.similarity > b.similarity;
                      return a.relation < b.relation;
                    });
  all.resize(keep);
  return all;
}

// ---------------------------------------------------------------------------
// relsim.bin cache
//
//   bytes 0..7   magic "KSRELSIM"
//   u32          format version (1)
//   u32          reserved (0)
//   u64          R
//   u64          graph checksum
//   R*R f64      TF-IDF weights, row-major
//
// All integers and floats little-endian.

namespace detail {

inline constexpr char kCacheMagic[8] = {'K', 'S', 'R', 'E', 'L', 'S', 'I', 'M'};
inline constexpr std::uint32_t kCacheVersion = 1;

inline void put_u64(std::ostream& out, std::uint64_t x) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((x >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

inline void put_u32(std::ostream& out, std::uint32_t x) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((x >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

inline bool get_u64(std::istream& in, std::uint64_t& x) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) return false;
  x = 0;
  for (int i = 7; i >= 0; --i) x = (x << 8) | bytes[i];
  return true;
}

inline bool get_u32(std::istream& in, std::uint32_t& x) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) return false;
  x = 0;
  for (int i = 3; i >= 0; --i) x = (x << 8) | bytes[i];
  return true;
}

}  // namespace detail

inline void save_similarity_cache(const SimilarityModel& m, std::uint64_t checksum,
                                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw bad_input("cannot write similarity cache " + path.string());
  out.write(detail::kCacheMagic, sizeof detail::kCacheMagic);
  detail::put_u32(out, detail::kCacheVersion);
  detail::put_u32(out, 0);
  detail::put_u64(out, m.size());
  detail::put_u64(out, checksum);
  for (double w : m.weights()) detail::put_u64(out, std::bit_cast<std::uint64_t>(w));
  if (!out) throw bad_input("failed writing similarity cache " + path.string());
}

// nullopt when the file is missing, corrupt, or was built from another graph.
inline std::optional<SimilarityModel> load_similarity_cache(
    const std::filesystem::path& path, std::size_t relations,
    std::uint64_t checksum) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  if (!in.read(magic, 8) || !std::equal(magic, magic + 8, detail::kCacheMagic))
    return std::nullopt;
  std::uint32_t version = 0, reserved = 0;
  std::uint64_t size = 0, stored_checksum = 0;
  if (!detail::get_u32(in, version) || !detail::get_u32(in, reserved) ||
      !detail::get_u64(in, size) || !detail::get_u64(in, stored_checksum))
    return std::nullopt;
  if (version != detail::kCacheVersion || size != relations ||
      stored_checksum != checksum)
    return std::nullopt;
  std::vector<double> weights(size * size);
  for (auto& w : weights) {
    std::uint64_t bits = 0;
    if (!detail::get_u64(in, bits)) return std::nullopt;
    w = std::bit_cast<double>(bits);
  }
  if (in.peek() != std::char_traits<char>::eof()) return std::nullopt;
  return SimilarityModel(size, std::move(weights));
}

}  // namespace kstream
