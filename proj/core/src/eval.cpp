#include "chartdate/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace chartdate {

ErrorMetrics error_metrics(std::span<const double> truths, std::span<const double> estimates) {
  if (truths.size() != estimates.size()) throw std::invalid_argument("truths and estimates differ in length");
  if (truths.empty()) throw std::invalid_argument("no errors to summarize");
  std::vector<double> abs_errors(truths.size());
  double sq = 0.0;
  double abs = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const double e = estimates[i] - truths[i];
    abs_errors[i] = std::abs(e);
    sq += e * e;
    abs += abs_errors[i];
  }
  const auto n = static_cast<double>(truths.size());
  ErrorMetrics m;
  m.rmse = std::sqrt(sq / n);
  m.mae = abs / n;
  std::sort(abs_errors.begin(), abs_errors.end());
  const auto mid = abs_errors.size() / 2;
  m.medae = abs_errors.size() % 2 == 1 ? abs_errors[mid] : 0.5 * (abs_errors[mid - 1] + abs_errors[mid]);
  return m;
}

EvalReport make_report(std::string method, std::string params, std::string split,
                       std::vector<DocResult> per_doc) {
  EvalReport report;
  report.method = std::move(method);
  report.params = std::move(params);
  report.split = std::move(split);
  report.per_doc = std::move(per_doc);
  std::vector<double> truths;
  std::vector<double> estimates;
  for (const auto& d : report.per_doc) {
    truths.push_back(d.truth);
    estimates.push_back(d.estimate);
    if (d.fallback) ++report.fallbacks;
  }
  report.metrics = error_metrics(truths, estimates);
  return report;
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

void write_summary_tsv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "method\tparams\tsplit\tn\tfallbacks\trmse\tmae\tmedae\n";
  for (const auto& r : reports) {
    out << r.method << '\t' << r.params << '\t' << r.split << '\t' << r.per_doc.size() << '\t'
        << r.fallbacks << '\t' << format_number(r.metrics.rmse) << '\t'
        << format_number(r.metrics.mae) << '\t' << format_number(r.metrics.medae) << '\n';
  }
}

void write_per_doc_tsv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "method\tparams\tsplit\tid\ttruth\testimate\tabs_error\tfallback\n";
  for (const auto& r : reports)
    for (const auto& d : r.per_doc)
      out << r.method << '\t' << r.params << '\t' << r.split << '\t' << d.id << '\t'
          << format_number(d.truth) << '\t' << format_number(d.estimate) << '\t'
          << format_number(d.abs_error) << '\t' << (d.fallback ? 1 : 0) << '\n';
}

void write_table(std::ostream& out, std::span<const EvalReport> reports) {
  struct Row {
    std::string method, params;
    std::vector<const EvalReport*> splits;
  };
  std::vector<Row> rows;
  for (const auto& r : reports) {
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const Row& row) { return row.method == r.method && row.params == r.params; });
    if (it == rows.end()) {
      rows.push_back({r.method, r.params, {}});
      it = rows.end() - 1;
    }
    it->splits.push_back(&r);
  }

  auto pair = [](const Row& row, double ErrorMetrics::*field) {
    std::string cell;
    for (std::size_t i = 0; i < row.splits.size(); ++i) {
      if (i > 0) cell += ", ";
      cell += format_number(row.splits[i]->metrics.*field);
    }
    return cell;
  };
  auto split_names = [](const Row& row) {
    std::string cell;
    for (std::size_t i = 0; i < row.splits.size(); ++i) {
      if (i > 0) cell += ", ";
      cell += row.splits[i]->split;
    }
    return cell;
  };

  std::vector<std::vector<std::string>> cells{{"method", "params", "splits", "rmse", "mae", "medae"}};
  for (const auto& row : rows)
    cells.push_back({row.method, row.params.empty() ? "-" : row.params, split_names(row),
                     pair(row, &ErrorMetrics::rmse), pair(row, &ErrorMetrics::mae),
                     pair(row, &ErrorMetrics::medae)});

  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  for (const auto& line : cells) {
    std::string text;
    for (std::size_t c = 0; c < line.size(); ++c) {
      text += line[c];
      if (c + 1 < line.size()) text += std::string(width[c] - line[c].size() + 2, ' ');
    }
    out << text << '\n';
  }
}

}  // namespace chartdate
