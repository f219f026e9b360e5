#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace chartdate {

struct ErrorMetrics {
  double rmse = 0.0;
  double mae = 0.0;
  /// Median absolute error; mean of the middle two for an even count.
  double medae = 0.0;
};

/// Throws std::invalid_argument on empty or mismatched inputs.
ErrorMetrics error_metrics(std::span<const double> truths, std::span<const double> estimates);

struct DocResult {
  std::string id;
  double truth = 0.0;
  double estimate = 0.0;
  double abs_error = 0.0;
  /// The method could not date the document; `estimate` is the training
  /// median.
  bool fallback = false;
};

/// Errors of one method configuration on one split.
struct EvalReport {
  std::string method;
  std::string params;
  std::string split;
  std::vector<DocResult> per_doc;
  ErrorMetrics metrics;
  std::size_t fallbacks = 0;
};

/// Fills metrics and fallbacks from per_doc.
EvalReport make_report(std::string method, std::string params, std::string split,
                       std::vector<DocResult> per_doc);

/// "%.6g".
std::string format_number(double value);

/// One row per report: method, params, split, n, fallbacks, rmse, mae,
/// medae.
void write_summary_tsv(std::ostream& out, std::span<const EvalReport> reports);

/// One row per (report, document).
void write_per_doc_tsv(std::ostream& out, std::span<const EvalReport> reports);

/// Aligned table with one line per (method, params) and "val, test" pairs
/// in the metric columns. Reports from a single split fill one value.
void write_table(std::ostream& out, std::span<const EvalReport> reports);

}  // namespace chartdate
