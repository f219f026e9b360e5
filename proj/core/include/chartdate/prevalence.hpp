#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "chartdate/corpus.hpp"
#include "chartdate/estimate.hpp"
#include "chartdate/kernel.hpp"

namespace chartdate {

/// Maximum-prevalence dating configuration.
struct PrevalenceConfig {
  int k = 2;
  KernelSpec kernel{KernelShape::student_t, 12.0, 3.0};
  /// 0: kernel-weighted proportion. 1: local linear logistic fit.
  int degree = 0;
  /// Floor for shingle probabilities inside the log. Unset means
  /// 1 / (2 * total training slots).
  std::optional<double> epsilon;
  /// Count each distinct shingle of the document once instead of once per
  /// occurrence.
  bool distinct_shingles = false;
  /// Documents with fewer known shingles are flagged low-confidence.
  std::size_t min_shingles = 10;

  /// Throws std::invalid_argument on k < 1, degree outside {0, 1}, an
  /// invalid kernel or a nonpositive epsilon.
  void validate() const;
};

/// One year's data in a local logistic fit: offset x = year - t, successes
/// n out of `total` trials, kernel weight w. Counts may be fractional.
struct LocalObservation {
  double x = 0.0;
  double n = 0.0;
  double total = 0.0;
  double weight = 0.0;
};

struct LocalLogitFit {
  double beta0 = 0.0;
  double beta1 = 0.0;
  bool converged = false;
  /// beta0 hit the [-15, 15] clip (complete separation).
  bool clipped = false;
  int iterations = 0;
};

/// Maximizes sum_i w_i (n_i eta_i - N_i log(1 + exp eta_i)) over
/// eta_i = beta0 + beta1 x_i by damped Newton iteration (step halving, at
/// most 50 iterations). Converged means both score residuals are below
/// 1e-8. Requires two distinct x with positive weight; throws
/// std::invalid_argument otherwise.
LocalLogitFit fit_local_logit(std::span<const LocalObservation> obs);

/// The two score equations at (beta0, beta1) with weights normalized to
/// sum to one: sum w (n - N p) and sum w x (n - N p).
std::array<double, 2> local_logit_scores(std::span<const LocalObservation> obs, double beta0,
                                         double beta1);

/// Local log-likelihood with weights normalized to sum to one.
double local_logit_likelihood(std::span<const LocalObservation> obs, double beta0, double beta1);

/// Value of a shingle probability estimate plus how it was obtained.
struct ShingleProbability {
  double value = 0.0;
  bool nw_fallback = false;
  bool clipped = false;
};

/// log max(pi_hat_s(t), epsilon) over a model's eval years.
struct LogCurve {
  std::vector<double> values;
  /// Some year fell back to the kernel-weighted proportion.
  bool nw_fallback = false;
  /// Some year hit the logit clip.
  bool clipped = false;
};

/// Shingle probability curves over a training index and the prevalence
/// functions built from them. Per-shingle log curves are memoized in a
/// thread-safe cache, so one model can serve concurrent dating calls.
class PrevalenceModel {
 public:
  PrevalenceModel(std::shared_ptr<const ShingleIndex> index, PrevalenceConfig config);
  /// Builds the index from `train` with config.k.
  PrevalenceModel(std::span<const Document> train, PrevalenceConfig config);
  ~PrevalenceModel();
  PrevalenceModel(PrevalenceModel&&) noexcept;
  PrevalenceModel& operator=(PrevalenceModel&&) noexcept;

  const ShingleIndex& index() const { return *index_; }
  std::shared_ptr<const ShingleIndex> shared_index() const { return index_; }
  const PrevalenceConfig& config() const { return config_; }
  double epsilon() const { return epsilon_; }

  /// Integer years of the training range at which the kernel puts positive
  /// mass on some training slot.
  const std::vector<int>& eval_years() const { return eval_years_; }

  /// Kernel-weighted proportion. Shingles absent from the index give 0.
  /// Throws NumericalError when no training slot has kernel mass at t.
  double pi_hat_nw(std::string_view key, int t) const;
  double pi_hat_nw(ShingleId id, int t) const;

  /// Local linear logistic estimate; falls back to pi_hat_nw when fewer
  /// than two years carry mass or Newton fails to converge.
  ShingleProbability pi_hat_ll(std::string_view key, int t) const;
  ShingleProbability pi_hat_ll(ShingleId id, int t) const;

  /// The data pi_hat_ll fits at t: one observation per training year.
  std::vector<LocalObservation> local_observations(std::optional<ShingleId> id, int t) const;

  /// Probability by the configured degree.
  ShingleProbability pi_hat(ShingleId id, int t) const;

  /// Memoized log curve of one shingle.
  std::shared_ptr<const LogCurve> log_curve(ShingleId id) const;

  /// Sum over every indexed shingle of log(1 - pi_hat(s, t)) at every eval
  /// year. Computed once.
  const std::vector<double>& log_complement_total() const;

 private:
  struct Cache;

  double nw(std::optional<ShingleId> id, int t) const;
  LogCurve compute_log_curve(ShingleId id) const;

  std::shared_ptr<const ShingleIndex> index_;
  PrevalenceConfig config_;
  double epsilon_ = 0.0;
  std::vector<int> eval_years_;
  // weights_[e][y - year_min]: kernel ratio between eval year e and year y.
  std::vector<std::vector<double>> weights_;
  std::vector<double> denominators_;
  std::unique_ptr<Cache> cache_;
};

struct PrevalenceCurve {
  std::vector<int> years;
  /// log of the estimated prevalence function at each year.
  std::vector<double> log_values;
  int argmax_year = 0;
  /// More than one year attains the maximum.
  bool tie = false;
  std::size_t used_shingles = 0;
  std::size_t unknown_shingles = 0;
  bool nw_fallback = false;
  bool clipped = false;
};

/// Sum of log shingle probabilities over the document's shingles, at every
/// eval year. Shingles unknown to the index are skipped and counted. Ties
/// for the maximum go to the year closest to the training median year,
/// then the smaller year. Throws DataError when no shingle is known.
PrevalenceCurve prevalence_curve(const Document& doc, const PrevalenceModel& model);

/// Argmax of the prevalence curve, with the curve attached.
DateEstimate mp_date(const Document& doc, const PrevalenceModel& model);

/// sum over indexed shingles s not in the document of log(1 - pi_hat_s(t)),
/// at every eval year.
Curve complement_diagnostic(const Document& doc, const PrevalenceModel& model);

}  // namespace chartdate
