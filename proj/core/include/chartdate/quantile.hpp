#pragma once

#include <span>
#include <vector>

#include "chartdate/corpus.hpp"
#include "chartdate/estimate.hpp"
#include "chartdate/kernel.hpp"
#include "chartdate/metrics.hpp"

namespace chartdate {

/// Quantile-regression dating configuration. The kernel's bandwidth is h,
/// in years.
struct QrConfig {
  double q = 0.1;
  KernelSpec kernel{KernelShape::gaussian, 30.0};
  /// Years whose effective kernel mass (sum of K(t_i - t)/K(0)) falls below
  /// this are left out of the curve.
  double min_mass = 20.0;
  /// Widen h to h * max(1, m0 / mass) where data is sparse.
  bool variable_bandwidth = false;
  double m0 = 50.0;

  /// Throws std::invalid_argument unless 0 < q < 1, the kernel is valid and
  /// min_mass, m0 are nonnegative.
  void validate() const;
};

/// Smallest value c with sum_{v_i <= c} w_i >= q * sum w_i, the
/// left-continuous minimizer of the weighted check loss. Throws
/// std::invalid_argument on mismatched lengths, empty input, negative
/// weights or a zero weight total.
double weighted_quantile(std::span<const double> values, std::span<const double> weights, double q);

/// Training documents vectorized under one distance, ready for quantile
/// dating of any number of targets and (q, h) settings.
class QrModel {
 public:
  /// Throws DataError when `train` is empty or holds undated documents.
  QrModel(std::vector<Document> train, DistanceSpec distance = {});

  std::size_t size() const { return years_.size(); }
  std::span<const double> years() const { return years_; }
  int year_min() const { return year_min_; }
  int year_max() const { return year_max_; }
  double median_year() const { return median_; }
  const DistanceSpec& distance() const { return corpus_.spec(); }

  /// Distance from `target` to every training document.
  std::vector<double> distances_to(const Document& target) const;

 private:
  std::vector<Document> train_;
  std::vector<double> years_;
  int year_min_ = 0;
  int year_max_ = 0;
  double median_ = 0.0;
  VectorizedCorpus corpus_;
};

struct QrCurve {
  std::vector<int> years;
  /// Fitted q-quantile of the distances at each year.
  std::vector<double> values;
  std::vector<double> masses;
  std::vector<double> bandwidths;

  Curve as_curve() const;
};

/// Weighted q-quantile of the distances at every integer year of the
/// training range that passes the mass threshold. Throws DataError when no
/// year does.
QrCurve qr_curve(std::span<const double> distances, const QrModel& model, const QrConfig& config);
QrCurve qr_curve(const Document& target, const QrModel& model, const QrConfig& config);

/// Year minimizing the curve; ties go to the year closest to the training
/// median year, then the smaller year. Throws DataError when fewer than
/// three years are defined.
DateEstimate qr_date(std::span<const double> distances, const QrModel& model, const QrConfig& config);
DateEstimate qr_date(const Document& target, const QrModel& model, const QrConfig& config);

struct QrTuneResult {
  QrConfig config;
  double mae = 0.0;
  /// Validation documents that could not be dated under the chosen config.
  std::size_t undated = 0;
};

/// Picks (q, h) minimizing mean absolute error on `validation`; ties go to
/// the larger h, then the larger q. Undatable documents count with the
/// error of the training median. `base` supplies the remaining settings.
/// Throws std::invalid_argument on an empty grid, DataError when
/// `validation` is empty or undated.
QrTuneResult qr_tune(std::span<const Document> validation, const QrModel& model,
                     std::span<const double> q_grid, std::span<const double> h_grid,
                     const QrConfig& base = {});

}  // namespace chartdate
