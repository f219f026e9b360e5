#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "chartdate/corpus.hpp"
#include "chartdate/estimate.hpp"
#include "chartdate/kernel.hpp"
#include "chartdate/metrics.hpp"

namespace chartdate {

/// Distance-weighted (kNN) dating configuration. Entry k of `distances`,
/// `kernels` and `bandwidth_grid` describes the k-th distance measure. The
/// kernels' bandwidths are only used by callers that fix them; the full
/// procedure picks them from the grid by local cross-validation.
struct KnnConfig {
  std::vector<DistanceSpec> distances{DistanceSpec{}};
  std::vector<KernelSpec> kernels{KernelSpec{}};
  int m = 20;
  /// One grid per distance; an empty grid means default_bandwidth_grid().
  std::vector<std::vector<double>> bandwidth_grid;

  /// Throws std::invalid_argument when the lists disagree in length, m < 2,
  /// or a kernel / distance is invalid.
  void validate() const;

  std::span<const double> grid(std::size_t k) const;

  /// 12 log-spaced bandwidths spanning [0.05, 1].
  static const std::vector<double>& default_bandwidth_grid();
  /// Neighborhood sizes worth sweeping.
  static constexpr std::array<int, 6> kNeighborhoodSizes{5, 10, 20, 100, 500, 1000};
};

/// a(i, j) = prod_k K_{h_k}(d_k(i, j)), kernel scale constants included.
double kernel_weight(std::span<const double> distances, std::span<const KernelSpec> kernels);

/// Distances from one document to every training document: table[k][j]
/// is the k-th distance to training document j.
using DistanceTable = std::vector<std::vector<double>>;

/// Training corpus prepared for kNN dating: vectorized once per distance,
/// with a lazily filled, thread-safe cache of training-to-training distance
/// rows used by leave-one-out cross-validation.
class KnnModel {
 public:
  /// Throws DataError when `train` is empty or holds undated documents.
  KnnModel(std::vector<Document> train, KnnConfig config);

  const KnnConfig& config() const { return config_; }
  std::size_t size() const;
  std::size_t measures() const;
  const Document& document(std::size_t j) const;
  std::span<const double> years() const;
  double year_min() const;
  double year_max() const;
  /// Rank of each training document's id in ascending id order.
  std::span<const std::size_t> id_ranks() const;

  DistanceTable distances_to(const Document& target) const;
  /// Distances from training document j to all training documents under
  /// measure k.
  const std::vector<double>& training_row(std::size_t k, std::size_t j) const;

  /// Copy sharing this model's vectorized corpora and row cache but with a
  /// different neighborhood size.
  KnnModel with_neighborhood(int m) const;

 private:
  struct Shared;

  KnnConfig config_;
  std::shared_ptr<const Shared> shared_;
};

/// Kernel weights of every training document for a target, normalized so
/// the largest is 1 (the normalization drops kernel scale constants).
/// Returns all zeros when no training document has positive weight.
std::vector<double> knn_weights(const DistanceTable& table, const KnnModel& model,
                                std::span<const double> bandwidths);

/// Weighted mean of training dates with fixed bandwidths. If every weight
/// vanishes, falls back to the unweighted mean over the m nearest by the
/// first distance and flags the estimate.
DateEstimate knn_estimate(const DistanceTable& table, const KnnModel& model,
                          std::span<const double> bandwidths);
DateEstimate knn_estimate(const Document& target, const KnnModel& model,
                          std::span<const double> bandwidths);

/// Union over distances of the m nearest training documents (ties broken
/// by ascending document id), as ascending training positions.
std::vector<std::size_t> neighborhood(const DistanceTable& table, const KnnModel& model);
std::vector<std::size_t> neighborhood(const Document& target, const KnnModel& model);

/// Leave-one-out estimate of training document j's date, excluding j from
/// the training set. NaN when every remaining weight vanishes.
double loo_estimate(std::size_t j, const KnnModel& model, std::span<const double> bandwidths);

struct BandwidthSelection {
  std::vector<double> bandwidths;
  double cv_score = 0.0;
  std::vector<std::size_t> neighborhood;
};

/// Grid search minimizing the local cross-validation score over the
/// target's neighborhood. Ties go to the lexicographically largest
/// bandwidth vector. Throws std::invalid_argument on an empty grid,
/// DataError when the neighborhood has fewer than two members.
BandwidthSelection select_bandwidths(const DistanceTable& table, const KnnModel& model);
BandwidthSelection select_bandwidths(const Document& target, const KnnModel& model);

/// Local cross-validation score for one bandwidth vector over a given
/// neighborhood.
double cv_score(std::span<const std::size_t> neighbors, const KnnModel& model,
                std::span<const double> bandwidths);

/// Square root of the weighted mean of squared leave-one-out errors over
/// the neighborhood, weighted by the target's kernel weights. Throws
/// NumericalError when the neighborhood weights sum to zero.
double knn_stderr(const DistanceTable& table, const KnnModel& model,
                  std::span<const double> bandwidths);
double knn_stderr(const Document& target, const KnnModel& model,
                  std::span<const double> bandwidths);

/// Full procedure: select bandwidths, estimate, attach the error estimate.
DateEstimate knn_date(const Document& target, const KnnModel& model);

}  // namespace chartdate
