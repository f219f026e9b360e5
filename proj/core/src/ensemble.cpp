#include "chartdate/ensemble.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace chartdate {

double blend_predict(std::span<const double> weights, std::span<const double> row) {
  if (weights.size() != row.size())
    throw std::invalid_argument("blend weights and estimates differ in length");
  double sum = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) sum += weights[j] * row[j];
  return sum;
}

double blend_mse(const EstimateMatrix& estimates, std::span<const double> truths,
                 std::span<const double> weights) {
  if (estimates.size() != truths.size() || estimates.empty())
    throw std::invalid_argument("need one truth per estimate row");
  double sum = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double e = blend_predict(weights, estimates[i]) - truths[i];
    sum += e * e;
  }
  return sum / static_cast<double>(estimates.size());
}

namespace {

// Sum-to-one minimizer of |R w|^2 restricted to the methods in `subset`.
std::optional<std::vector<double>> solve(const Eigen::MatrixXd& gram, const std::vector<int>& subset,
                                         double ridge) {
  const auto k = static_cast<Eigen::Index>(subset.size());
  Eigen::MatrixXd g(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) g(a, b) = gram(subset[a], subset[b]);
  const double diag = g.diagonal().mean();
  g.diagonal().array() += ridge * (diag > 0.0 ? diag : 1.0);

  Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
  const Eigen::VectorXd x = ldlt.solve(Eigen::VectorXd::Ones(k));
  const double total = x.sum();
  if (!std::isfinite(total) || !(std::abs(total) > 0.0) || !x.allFinite()) return std::nullopt;

  std::vector<double> w(static_cast<std::size_t>(gram.rows()), 0.0);
  for (Eigen::Index a = 0; a < k; ++a) w[static_cast<std::size_t>(subset[a])] = x(a) / total;
  return w;
}

}  // namespace

BlendWeights fit_blend(const EstimateMatrix& estimates, std::span<const double> truths,
                       const BlendOptions& options) {
  if (estimates.empty()) throw std::invalid_argument("blend needs validation estimates");
  const std::size_t p = estimates.front().size();
  if (p < 2) throw std::invalid_argument("blend needs at least two methods");
  if (estimates.size() < p + 1)
    throw std::invalid_argument("blend needs more validation documents than methods");
  if (truths.size() != estimates.size()) throw std::invalid_argument("need one truth per estimate row");
  if (options.nonnegative && p > 16)
    throw std::invalid_argument("nonnegative blends support at most 16 methods");

  // Gram matrix of the error columns: for sum-to-one weights the blended
  // error is sum_j w_j (E_ij - y_i).
  const auto n = static_cast<Eigen::Index>(estimates.size());
  Eigen::MatrixXd r(n, static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (estimates[i].size() != p) throw std::invalid_argument("ragged estimate matrix");
    for (std::size_t j = 0; j < p; ++j)
      r(i, static_cast<Eigen::Index>(j)) = estimates[i][j] - truths[i];
  }
  const Eigen::MatrixXd gram = r.transpose() * r;

  BlendWeights out;
  std::vector<int> all(p);
  for (std::size_t j = 0; j < p; ++j) all[j] = static_cast<int>(j);

  std::optional<std::vector<double>> best;
  double best_mse = std::numeric_limits<double>::infinity();
  if (!options.nonnegative) {
    best = solve(gram, all, options.ridge);
    if (best) best_mse = blend_mse(estimates, truths, *best);
  } else {
    for (unsigned mask = 1; mask < (1u << p); ++mask) {
      std::vector<int> subset;
      for (std::size_t j = 0; j < p; ++j)
        if (mask & (1u << j)) subset.push_back(static_cast<int>(j));
      auto w = solve(gram, subset, options.ridge);
      if (!w) continue;
      bool ok = true;
      for (double v : *w) ok = ok && v >= 0.0;
      if (!ok) continue;
      const double mse = blend_mse(estimates, truths, *w);
      if (mse < best_mse) {
        best_mse = mse;
        best = std::move(w);
      }
    }
  }

  if (!best) {
    out.weights.assign(p, 1.0 / static_cast<double>(p));
    out.singular = true;
    best_mse = blend_mse(estimates, truths, out.weights);
  } else {
    out.weights = std::move(*best);
  }

  // Unit vectors satisfy the constraint, so the blend must do at least as
  // well as the best single method.
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<double> unit(p, 0.0);
    unit[j] = 1.0;
    const double mse = blend_mse(estimates, truths, unit);
    if (mse < best_mse) {
      best_mse = mse;
      out.weights = std::move(unit);
      out.single_method = true;
    }
  }
  return out;
}

}  // namespace chartdate
