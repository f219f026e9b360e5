#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chartdate/corpus.hpp"

namespace chartdate {

/// How shingle occurrences are turned into vector coordinates.
enum class VectorMode {
  raw,         ///< occurrence counts
  normalized,  ///< counts divided by their total
  incidence,   ///< 1 when the shingle occurs
};

std::string_view to_string(VectorMode mode);
VectorMode parse_vector_mode(std::string_view name);

/// Sparse nonnegative vector over shingle coordinates, sorted by
/// coordinate with no explicit zeros.
class CountVector {
 public:
  using Entry = std::pair<std::uint32_t, double>;

  CountVector() = default;

  /// `counts` are (coordinate, raw count) pairs in any order; duplicates
  /// are summed and the result is transformed according to `mode`.
  static CountVector from_counts(std::vector<Entry> counts, VectorMode mode);
  /// Coordinate i holds values[i].
  static CountVector from_dense(std::span<const double> values, VectorMode mode);

  std::span<const Entry> entries() const { return entries_; }
  VectorMode mode() const { return mode_; }
  std::size_t nonzeros() const { return entries_.size(); }
  bool is_zero() const { return entries_.empty(); }
  double max_value() const { return max_; }

 private:
  std::vector<Entry> entries_;
  VectorMode mode_ = VectorMode::raw;
  double max_ = 0.0;
};

/// Interns shingle keys to dense coordinates.
class ShingleVocabulary {
 public:
  std::uint32_t intern(std::string_view key);
  std::optional<std::uint32_t> find(std::string_view key) const;
  std::size_t size() const { return ids_.size(); }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
};

/// Vectorizes the k-shingles of `doc`, adding new shingles to `vocab`.
CountVector vectorize(const Document& doc, int k, VectorMode mode, ShingleVocabulary& vocab);

/// Vectorizes against a frozen vocabulary. Shingles unknown to `vocab`
/// receive private coordinates >= vocab.size(), so they count towards
/// norms and unions but never match a vocabulary shingle.
CountVector vectorize_frozen(const Document& doc, int k, VectorMode mode,
                             const ShingleVocabulary& vocab);

/// Sum p^g q^g / (sqrt(sum p^2g) sqrt(sum q^2g)). Throws NumericalError
/// when either vector is zero.
double sim_gamma(const CountVector& p, const CountVector& q, double gamma);

/// Sum p^a q^a / sum (p^2a + q^2a - p^a q^a). Throws NumericalError when
/// both vectors are zero.
double sim_alpha(const CountVector& p, const CountVector& q, double alpha);

/// 1 - sim_alpha, rounded up to a multiple of 2^-40. On incidence vectors
/// this is the Jaccard distance and the triangle inequality holds exactly in
/// floating point. On general count vectors it can fail: p = (5,1,2),
/// q = (5,2,6), r = (4,2,6) give d(p,r) > d(p,q) + d(q,r).
double dist_alpha(const CountVector& p, const CountVector& q, double alpha);

/// |S_k(d1) & S_k(d2)| / |S_k(d1) | S_k(d2)| over distinct k-shingles.
/// Throws DataError when either document has no k-shingle.
double broder_resemblance(const Document& d1, const Document& d2, int k);
double broder_distance(const Document& d1, const Document& d2, int k);

/// Jaccard resemblance of the supports of two vectors, and its complement
/// |symmetric difference| / |union| rounded up to a multiple of 2^-40.
double support_resemblance(const CountVector& p, const CountVector& q);
double support_distance(const CountVector& p, const CountVector& q);

enum class DistanceFamily { sim_gamma, sim_alpha, broder };

std::string_view to_string(DistanceFamily family);
DistanceFamily parse_distance_family(std::string_view name);

/// Which dissimilarity to compute between two documents. Defaults to the
/// reference configuration: Dist_alpha, alpha = 1, raw counts, k = 1.
struct DistanceSpec {
  DistanceFamily family = DistanceFamily::sim_alpha;
  double exponent = 1.0;  ///< gamma or alpha; ignored for broder
  int k = 1;
  VectorMode mode = VectorMode::raw;

  /// Throws std::invalid_argument on exponent <= 0 or k < 1.
  void validate() const;
  std::string describe() const;
};

/// Dissimilarity in [0, 1]: 1 - Sim_gamma, Dist_alpha, or 1 - Res_k
/// (computed on supports) depending on `spec.family`.
double distance(const DistanceSpec& spec, const CountVector& p, const CountVector& q);

/// Training documents vectorized once under a DistanceSpec, with a frozen
/// vocabulary for vectorizing targets. Immutable after construction.
///
/// Documents with no k-shingle are kept (so positions line up with the
/// input) and sit at distance 1 from everything.
class VectorizedCorpus {
 public:
  VectorizedCorpus(std::span<const Document> docs, DistanceSpec spec);

  const DistanceSpec& spec() const { return spec_; }
  std::size_t size() const { return vectors_.size(); }
  const CountVector& vector(std::size_t i) const { return vectors_[i]; }

  CountVector vectorize(const Document& doc) const;

  /// Distances from `v` to every training document. Throws DataError when
  /// `v` is zero.
  std::vector<double> distances_to(const CountVector& v) const;
  std::vector<double> distances_to(const Document& doc) const {
    return distances_to(vectorize(doc));
  }
  /// Distance between training documents i and j.
  double distance(std::size_t i, std::size_t j) const;

 private:
  double guarded(const CountVector& a, const CountVector& b) const;

  DistanceSpec spec_;
  ShingleVocabulary vocab_;
  std::vector<CountVector> vectors_;
};

}  // namespace chartdate
