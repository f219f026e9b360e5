#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace chartdate {

/// One sample of a per-year diagnostic curve.
struct CurvePoint {
  int year = 0;
  double value = 0.0;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

using Curve = std::vector<CurvePoint>;

/// Point estimate of a document's year produced by one dating method.
struct DateEstimate {
  double year_hat = 0.0;
  std::string method;
  std::optional<double> std_error;
  Curve curve;
  std::vector<std::string> flags;
  /// Named scalars describing how the estimate was reached (selected
  /// bandwidths, neighborhood size, ...), in insertion order.
  std::vector<std::pair<std::string, double>> details;

  bool has_flag(const std::string& flag) const {
    return std::find(flags.begin(), flags.end(), flag) != flags.end();
  }
  void add_flag(std::string flag) {
    if (!has_flag(flag)) flags.push_back(std::move(flag));
  }
};

// Flags attached to estimates. They are stable strings so that reports and
// CLI output can be diffed across runs.
namespace flags {
inline constexpr const char* kUniformFallback = "uniform_fallback";
inline constexpr const char* kTie = "tie";
inline constexpr const char* kLowConfidence = "low_confidence";
inline constexpr const char* kNwFallback = "nw_fallback";
inline constexpr const char* kClippedLogit = "clipped_logit";
inline constexpr const char* kUnknownShingles = "unknown_shingles";
inline constexpr const char* kEdgeBias = "edge";
}  // namespace flags

}  // namespace chartdate
