#pragma once

#include <span>
#include <vector>

namespace chartdate {

/// Blend weights, one per base method, summing to one.
struct BlendWeights {
  std::vector<double> weights;
  /// The normal equations were singular; weights are equal.
  bool singular = false;
  /// A single method beat the solved blend and was returned alone.
  bool single_method = false;
};

struct BlendOptions {
  /// Restrict weights to be nonnegative.
  bool nonnegative = false;
  /// Ridge added to the normal equations, relative to their mean diagonal.
  double ridge = 1e-8;
};

/// estimates[i][j]: method j's estimate for validation document i.
using EstimateMatrix = std::vector<std::vector<double>>;

/// Sum-to-one weights minimizing mean squared error of the blended
/// estimates against `truths`. Throws std::invalid_argument for fewer than
/// two methods or ragged rows, and when there are fewer than methods + 1
/// documents.
BlendWeights fit_blend(const EstimateMatrix& estimates, std::span<const double> truths,
                       const BlendOptions& options = {});

/// Dot product of weights and one row of estimates. Throws
/// std::invalid_argument on a length mismatch.
double blend_predict(std::span<const double> weights, std::span<const double> row);

/// Mean squared error of blend_predict over all rows.
double blend_mse(const EstimateMatrix& estimates, std::span<const double> truths,
                 std::span<const double> weights);

}  // namespace chartdate
