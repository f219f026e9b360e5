#include "chartdate/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "chartdate/error.hpp"

namespace chartdate {

void QrConfig::validate() const {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile q must lie in (0, 1)");
  kernel.validate();
  if (!(min_mass >= 0.0)) throw std::invalid_argument("mass threshold must be nonnegative");
  if (!(m0 >= 0.0)) throw std::invalid_argument("variable-bandwidth mass m0 must be nonnegative");
}

namespace {

// Scans values in ascending order (ties by position) until the running
// weight reaches q * total.
double quantile_sorted(std::span<const std::size_t> order, std::span<const double> values,
                       std::span<const double> weights, double total, double q) {
  const double target = q * total;
  double cum = 0.0;
  for (auto i : order) {
    cum += weights[i];
    if (cum >= target && weights[i] > 0.0) return values[i];
  }
  // Rounding left the running sum short of the target; the last positive
  // weight carries the quantile.
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if (weights[*it] > 0.0) return values[*it];
  return values[order.back()];
}

std::vector<std::size_t> sorted_order(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return order;
}

}  // namespace

double weighted_quantile(std::span<const double> values, std::span<const double> weights, double q) {
  if (values.size() != weights.size()) throw std::invalid_argument("values and weights differ in length");
  if (values.empty()) throw std::invalid_argument("weighted quantile of nothing");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile q must lie in (0, 1)");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("weights sum to zero");
  const auto order = sorted_order(values);
  return quantile_sorted(order, values, weights, total, q);
}

// ---------------------------------------------------------------------------
// Model

QrModel::QrModel(std::vector<Document> train, DistanceSpec distance)
    : train_(std::move(train)), corpus_(train_, distance) {
  if (train_.empty()) throw DataError("quantile regression needs a nonempty training set");
  for (const auto& doc : train_) {
    if (!doc.year) throw DataError("training document '" + doc.id + "' has no year");
    years_.push_back(*doc.year);
  }
  auto [lo, hi] = std::minmax_element(years_.begin(), years_.end());
  year_min_ = static_cast<int>(*lo);
  year_max_ = static_cast<int>(*hi);
  std::vector<double> sorted = years_;
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  median_ = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

std::vector<double> QrModel::distances_to(const Document& target) const {
  return corpus_.distances_to(target);
}

Curve QrCurve::as_curve() const {
  Curve curve;
  curve.reserve(years.size());
  for (std::size_t e = 0; e < years.size(); ++e) curve.push_back({years[e], values[e]});
  return curve;
}

QrCurve qr_curve(std::span<const double> distances, const QrModel& model, const QrConfig& config) {
  config.validate();
  if (distances.size() != model.size())
    throw std::invalid_argument("expected one distance per training document");
  const auto order = sorted_order(distances);
  const auto years = model.years();
  std::vector<double> w(years.size());

  auto fill_weights = [&](const KernelSpec& kernel, int t) {
    double mass = 0.0;
    for (std::size_t i = 0; i < years.size(); ++i) {
      w[i] = kernel.ratio(years[i] - t);
      mass += w[i];
    }
    return mass;
  };

  QrCurve curve;
  for (int t = model.year_min(); t <= model.year_max(); ++t) {
    KernelSpec kernel = config.kernel;
    double mass = fill_weights(kernel, t);
    if (config.variable_bandwidth && mass > 0.0 && mass < config.m0) {
      kernel.bandwidth *= config.m0 / mass;
      mass = fill_weights(kernel, t);
    }
    if (!(mass > 0.0) || mass < config.min_mass) continue;
    curve.years.push_back(t);
    curve.values.push_back(quantile_sorted(order, distances, w, mass, config.q));
    curve.masses.push_back(mass);
    curve.bandwidths.push_back(kernel.bandwidth);
  }
  if (curve.years.empty())
    throw DataError("no year has enough training mass for a quantile curve");
  return curve;
}

QrCurve qr_curve(const Document& target, const QrModel& model, const QrConfig& config) {
  return qr_curve(model.distances_to(target), model, config);
}

DateEstimate qr_date(std::span<const double> distances, const QrModel& model, const QrConfig& config) {
  const QrCurve curve = qr_curve(distances, model, config);
  if (curve.years.size() < 3) throw DataError("quantile curve is defined on fewer than three years");
  const double best = *std::min_element(curve.values.begin(), curve.values.end());
  const double median = model.median_year();
  std::optional<int> chosen;
  std::size_t tied = 0;
  for (std::size_t e = 0; e < curve.years.size(); ++e) {
    if (curve.values[e] != best) continue;
    ++tied;
    const int y = curve.years[e];
    if (!chosen || std::abs(y - median) < std::abs(*chosen - median)) chosen = y;
  }
  DateEstimate est;
  est.method = "qr";
  est.year_hat = *chosen;
  est.curve = curve.as_curve();
  if (tied > 1) est.add_flag(flags::kTie);
  if (*chosen == curve.years.front() || *chosen == curve.years.back()) est.add_flag(flags::kEdgeBias);
  est.details.emplace_back("q", config.q);
  est.details.emplace_back("h", config.kernel.bandwidth);
  est.details.emplace_back("min_quantile", best);
  return est;
}

DateEstimate qr_date(const Document& target, const QrModel& model, const QrConfig& config) {
  return qr_date(model.distances_to(target), model, config);
}

QrTuneResult qr_tune(std::span<const Document> validation, const QrModel& model,
                     std::span<const double> q_grid, std::span<const double> h_grid,
                     const QrConfig& base) {
  if (q_grid.empty() || h_grid.empty()) throw std::invalid_argument("quantile tuning grid is empty");
  if (validation.empty()) throw DataError("quantile tuning needs validation documents");

  std::vector<std::optional<std::vector<double>>> dists;
  dists.reserve(validation.size());
  for (const auto& doc : validation) {
    if (!doc.year) throw DataError("validation document '" + doc.id + "' has no year");
    try {
      dists.emplace_back(model.distances_to(doc));
    } catch (const DataError&) {
      dists.emplace_back(std::nullopt);
    }
  }

  std::vector<double> qs(q_grid.begin(), q_grid.end());
  std::vector<double> hs(h_grid.begin(), h_grid.end());
  std::sort(qs.rbegin(), qs.rend());
  std::sort(hs.rbegin(), hs.rend());

  std::optional<QrTuneResult> best;
  for (double h : hs) {
    for (double q : qs) {
      QrConfig config = base;
      config.q = q;
      config.kernel.bandwidth = h;
      config.validate();
      double sum = 0.0;
      std::size_t undated = 0;
      for (std::size_t i = 0; i < validation.size(); ++i) {
        double estimate = model.median_year();
        if (dists[i]) {
          try {
            estimate = qr_date(*dists[i], model, config).year_hat;
          } catch (const DataError&) {
            ++undated;
          }
        } else {
          ++undated;
        }
        sum += std::abs(estimate - *validation[i].year);
      }
      const double mae = sum / static_cast<double>(validation.size());
      if (!best || mae < best->mae) best = QrTuneResult{config, mae, undated};
    }
  }
  return *best;
}

}  // namespace chartdate
