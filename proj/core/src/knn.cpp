#include "chartdate/knn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include "chartdate/error.hpp"

namespace chartdate {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void KnnConfig::validate() const {
  if (distances.empty()) throw std::invalid_argument("kNN needs at least one distance");
  if (kernels.size() != distances.size())
    throw std::invalid_argument("kNN needs exactly one kernel per distance");
  if (!bandwidth_grid.empty() && bandwidth_grid.size() != distances.size())
    throw std::invalid_argument("kNN needs one bandwidth grid per distance");
  if (m < 2) throw std::invalid_argument("kNN neighborhood size m must be >= 2");
  for (const auto& d : distances) d.validate();
  for (const auto& k : kernels) k.validate();
  for (const auto& grid : bandwidth_grid)
    for (double h : grid)
      if (!(h > 0.0)) throw std::invalid_argument("bandwidth grid values must be > 0");
}

std::span<const double> KnnConfig::grid(std::size_t k) const {
  if (k < bandwidth_grid.size() && !bandwidth_grid[k].empty()) return bandwidth_grid[k];
  return default_bandwidth_grid();
}

const std::vector<double>& KnnConfig::default_bandwidth_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g(12);
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = 0.05 * std::pow(20.0, static_cast<double>(i) / 11.0);
    g.back() = 1.0;
    return g;
  }();
  return grid;
}

double kernel_weight(std::span<const double> distances, std::span<const KernelSpec> kernels) {
  if (distances.size() != kernels.size())
    throw std::invalid_argument("kernel_weight: one kernel per distance required");
  double weight = 1.0;
  for (std::size_t k = 0; k < distances.size(); ++k) {
    if (distances[k] < 0.0) throw std::invalid_argument("distances must be nonnegative");
    weight *= kernels[k](distances[k]);
  }
  return weight;
}

// ---------------------------------------------------------------------------
// Model

struct KnnModel::Shared {
  struct Slot {
    std::once_flag once;
    std::vector<double> row;
  };

  std::vector<Document> train;
  std::vector<double> years;
  std::vector<std::size_t> id_rank;  // position of each document's id in sorted order
  double ref_year = 0.0;
  double year_min = 0.0;
  double year_max = 0.0;
  std::vector<VectorizedCorpus> corpora;
  std::vector<std::unique_ptr<Slot[]>> rows;
};

KnnModel::KnnModel(std::vector<Document> train, KnnConfig config) : config_(std::move(config)) {
  config_.validate();
  if (train.empty()) throw DataError("kNN needs a nonempty training set");
  auto shared = std::make_shared<Shared>();
  shared->years.reserve(train.size());
  for (const auto& doc : train) {
    if (!doc.year) throw DataError("training document '" + doc.id + "' has no year");
    shared->years.push_back(*doc.year);
  }
  auto [lo, hi] = std::minmax_element(shared->years.begin(), shared->years.end());
  shared->year_min = *lo;
  shared->year_max = *hi;
  shared->ref_year = *lo;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return train[a].id < train[b].id; });
  shared->id_rank.resize(train.size());
  for (std::size_t r = 0; r < order.size(); ++r) shared->id_rank[order[r]] = r;

  for (const auto& spec : config_.distances) {
    shared->corpora.emplace_back(train, spec);
    shared->rows.emplace_back(new Shared::Slot[train.size()]);
  }
  shared->train = std::move(train);
  shared_ = std::move(shared);
}

std::size_t KnnModel::size() const { return shared_->train.size(); }
std::size_t KnnModel::measures() const { return shared_->corpora.size(); }
const Document& KnnModel::document(std::size_t j) const { return shared_->train[j]; }
std::span<const double> KnnModel::years() const { return shared_->years; }
double KnnModel::year_min() const { return shared_->year_min; }
double KnnModel::year_max() const { return shared_->year_max; }
std::span<const std::size_t> KnnModel::id_ranks() const { return shared_->id_rank; }

DistanceTable KnnModel::distances_to(const Document& target) const {
  DistanceTable table;
  table.reserve(measures());
  for (const auto& corpus : shared_->corpora) table.push_back(corpus.distances_to(target));
  return table;
}

const std::vector<double>& KnnModel::training_row(std::size_t k, std::size_t j) const {
  auto& slot = shared_->rows[k][j];
  std::call_once(slot.once, [&] {
    const auto& corpus = shared_->corpora[k];
    slot.row.resize(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) slot.row[i] = corpus.distance(j, i);
  });
  return slot.row;
}

KnnModel KnnModel::with_neighborhood(int m) const {
  KnnModel copy = *this;
  copy.config_.m = m;
  copy.config_.validate();
  return copy;
}

// ---------------------------------------------------------------------------
// Weighting

namespace {

// Kernels of the model with the given bandwidths substituted.
std::vector<KernelSpec> with_bandwidths(const KnnModel& model, std::span<const double> bandwidths) {
  if (bandwidths.size() != model.measures())
    throw std::invalid_argument("expected one bandwidth per distance measure");
  std::vector<KernelSpec> kernels = model.config().kernels;
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    kernels[k].bandwidth = bandwidths[k];
    kernels[k].validate();
  }
  return kernels;
}

// exp(L_j - max L) with L_j = sum_k log K_k(rows[k][j]) / K_k(0). Index
// `exclude` gets weight 0. All zeros when no finite log-weight exists.
std::vector<double> relative_weights(std::span<const std::span<const double>> rows,
                                     std::span<const KernelSpec> kernels, std::size_t exclude) {
  const std::size_t n = rows.front().size();
  std::vector<double> logw(n, 0.0);
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t j = 0; j < n; ++j) logw[j] += kernels[k].log_ratio(rows[k][j]);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j)
    if (j != exclude) top = std::max(top, logw[j]);
  std::vector<double> w(n, 0.0);
  if (!std::isfinite(top)) return w;
  for (std::size_t j = 0; j < n; ++j)
    if (j != exclude) w[j] = std::exp(logw[j] - top);
  return w;
}

// Weighted mean of training years centered at the reference year, so that
// equal years reproduce exactly. NaN when the weights sum to zero.
double weighted_year(std::span<const double> years, std::span<const double> w, double ref) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < years.size(); ++j) {
    num += (years[j] - ref) * w[j];
    den += w[j];
  }
  if (!(den > 0.0)) return kNaN;
  return ref + num / den;
}

std::vector<std::span<const double>> as_spans(const DistanceTable& table) {
  return {table.begin(), table.end()};
}

std::vector<std::size_t> nearest(std::span<const double> dists, std::span<const std::size_t> id_rank,
                                 std::size_t m) {
  std::vector<std::size_t> idx(dists.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  m = std::min(m, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (dists[a] != dists[b]) return dists[a] < dists[b];
                      return id_rank[a] < id_rank[b];
                    });
  idx.resize(m);
  return idx;
}

}  // namespace

std::vector<double> knn_weights(const DistanceTable& table, const KnnModel& model,
                                std::span<const double> bandwidths) {
  const auto kernels = with_bandwidths(model, bandwidths);
  const auto rows = as_spans(table);
  return relative_weights(rows, kernels, kNone);
}

std::vector<std::size_t> neighborhood(const DistanceTable& table, const KnnModel& model) {
  const auto id_rank = model.id_ranks();
  std::vector<std::size_t> out;
  const auto m = static_cast<std::size_t>(model.config().m);
  for (const auto& row : table) {
    auto near = nearest(row, id_rank, m);
    out.insert(out.end(), near.begin(), near.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> neighborhood(const Document& target, const KnnModel& model) {
  return neighborhood(model.distances_to(target), model);
}

DateEstimate knn_estimate(const DistanceTable& table, const KnnModel& model,
                          std::span<const double> bandwidths) {
  DateEstimate est;
  est.method = "knn";
  const auto w = knn_weights(table, model, bandwidths);
  const double ref = model.year_min();
  double year = weighted_year(model.years(), w, ref);
  if (!std::isfinite(year)) {
    const auto near = neighborhood(DistanceTable{table.front()}, model);
    double sum = 0.0;
    for (auto j : near) sum += model.years()[j] - ref;
    year = ref + sum / static_cast<double>(near.size());
    est.add_flag(flags::kUniformFallback);
  }
  est.year_hat = year;
  for (std::size_t k = 0; k < bandwidths.size(); ++k)
    est.details.emplace_back("h" + std::to_string(k + 1), bandwidths[k]);
  return est;
}

DateEstimate knn_estimate(const Document& target, const KnnModel& model,
                          std::span<const double> bandwidths) {
  return knn_estimate(model.distances_to(target), model, bandwidths);
}

double loo_estimate(std::size_t j, const KnnModel& model, std::span<const double> bandwidths) {
  const auto kernels = with_bandwidths(model, bandwidths);
  std::vector<std::span<const double>> rows;
  for (std::size_t k = 0; k < model.measures(); ++k) rows.emplace_back(model.training_row(k, j));
  const auto w = relative_weights(rows, kernels, j);
  return weighted_year(model.years(), w, model.year_min());
}

double cv_score(std::span<const std::size_t> neighbors, const KnnModel& model,
                std::span<const double> bandwidths) {
  if (neighbors.empty()) throw DataError("cross-validation needs a nonempty neighborhood");
  double sum = 0.0;
  for (auto j : neighbors) {
    const double loo = loo_estimate(j, model, bandwidths);
    if (!std::isfinite(loo)) return std::numeric_limits<double>::infinity();
    const double e = model.years()[j] - loo;
    sum += e * e;
  }
  return sum / static_cast<double>(neighbors.size());
}

// ---------------------------------------------------------------------------
// Bandwidth selection

BandwidthSelection select_bandwidths(const DistanceTable& table, const KnnModel& model) {
  const std::size_t r = model.measures();
  std::vector<std::vector<double>> grids(r);
  for (std::size_t k = 0; k < r; ++k) {
    auto g = model.config().grid(k);
    if (g.empty()) throw std::invalid_argument("bandwidth grid is empty");
    grids[k].assign(g.begin(), g.end());
    std::sort(grids[k].begin(), grids[k].end());
    grids[k].erase(std::unique(grids[k].begin(), grids[k].end()), grids[k].end());
  }

  BandwidthSelection best;
  best.neighborhood = neighborhood(table, model);
  if (best.neighborhood.size() < 2)
    throw DataError("bandwidth selection needs at least two neighbors");

  // Combinations in descending lexicographic order; combo index c maps to
  // per-measure grid indices with measure 0 most significant.
  std::size_t combos = 1;
  for (const auto& g : grids) combos *= g.size();
  auto decode = [&](std::size_t c) {
    std::vector<std::size_t> idx(r);
    for (std::size_t k = r; k-- > 0;) {
      idx[k] = grids[k].size() - 1 - c % grids[k].size();
      c /= grids[k].size();
    }
    return idx;
  };

  const auto years = model.years();
  const double ref = model.year_min();
  std::vector<double> sq_error(combos, 0.0);
  std::vector<bool> defined(combos, true);
  std::vector<double> logw(model.size());
  std::vector<double> w(model.size());
  std::vector<std::vector<std::vector<double>>> logs(r);

  for (auto jp : best.neighborhood) {
    // log K(d)/K(0) for every measure and grid bandwidth.
    for (std::size_t k = 0; k < r; ++k) {
      const auto& row = model.training_row(k, jp);
      KernelSpec kernel = model.config().kernels[k];
      logs[k].assign(grids[k].size(), std::vector<double>(row.size()));
      for (std::size_t g = 0; g < grids[k].size(); ++g) {
        kernel.bandwidth = grids[k][g];
        for (std::size_t j = 0; j < row.size(); ++j) logs[k][g][j] = kernel.log_ratio(row[j]);
      }
    }
    for (std::size_t c = 0; c < combos; ++c) {
      if (!defined[c]) continue;
      const auto idx = decode(c);
      std::fill(logw.begin(), logw.end(), 0.0);
      for (std::size_t k = 0; k < r; ++k) {
        const auto& l = logs[k][idx[k]];
        for (std::size_t j = 0; j < logw.size(); ++j) logw[j] += l[j];
      }
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < logw.size(); ++j)
        if (j != jp) top = std::max(top, logw[j]);
      if (!std::isfinite(top)) {
        defined[c] = false;
        continue;
      }
      for (std::size_t j = 0; j < logw.size(); ++j) w[j] = j == jp ? 0.0 : std::exp(logw[j] - top);
      const double loo = weighted_year(years, w, ref);
      if (!std::isfinite(loo)) {
        defined[c] = false;
        continue;
      }
      const double e = years[jp] - loo;
      sq_error[c] += e * e;
    }
  }

  std::size_t chosen = kNone;
  for (std::size_t c = 0; c < combos; ++c) {
    if (!defined[c]) continue;
    if (chosen == kNone || sq_error[c] < sq_error[chosen]) chosen = c;
  }
  if (chosen == kNone) throw NumericalError("no bandwidth gives positive leave-one-out weights");

  const auto idx = decode(chosen);
  best.bandwidths.resize(r);
  for (std::size_t k = 0; k < r; ++k) best.bandwidths[k] = grids[k][idx[k]];
  best.cv_score = sq_error[chosen] / static_cast<double>(best.neighborhood.size());
  return best;
}

BandwidthSelection select_bandwidths(const Document& target, const KnnModel& model) {
  return select_bandwidths(model.distances_to(target), model);
}

// ---------------------------------------------------------------------------
// Error estimate

double knn_stderr(const DistanceTable& table, const KnnModel& model,
                  std::span<const double> bandwidths) {
  const auto neighbors = neighborhood(table, model);
  const auto kernels = with_bandwidths(model, bandwidths);

  std::vector<double> logw(neighbors.size(), 0.0);
  for (std::size_t i = 0; i < neighbors.size(); ++i)
    for (std::size_t k = 0; k < table.size(); ++k)
      logw[i] += kernels[k].log_ratio(table[k][neighbors[i]]);
  double top = -std::numeric_limits<double>::infinity();
  for (double l : logw) top = std::max(top, l);
  if (!std::isfinite(top)) throw NumericalError("neighborhood kernel weights sum to zero");

  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    const double a = std::exp(logw[i] - top);
    const double loo = loo_estimate(neighbors[i], model, bandwidths);
    if (!std::isfinite(loo)) throw NumericalError("leave-one-out estimate undefined");
    const double e = model.years()[neighbors[i]] - loo;
    num += e * e * a;
    den += a;
  }
  return std::sqrt(num / den);
}

double knn_stderr(const Document& target, const KnnModel& model,
                  std::span<const double> bandwidths) {
  return knn_stderr(model.distances_to(target), model, bandwidths);
}

DateEstimate knn_date(const Document& target, const KnnModel& model) {
  const DistanceTable table = model.distances_to(target);
  const BandwidthSelection sel = select_bandwidths(table, model);
  DateEstimate est = knn_estimate(table, model, sel.bandwidths);
  try {
    est.std_error = knn_stderr(table, model, sel.bandwidths);
  } catch (const NumericalError&) {
    est.add_flag(flags::kLowConfidence);
  }
  est.details.emplace_back("cv", sel.cv_score);
  est.details.emplace_back("neighbors", static_cast<double>(sel.neighborhood.size()));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (auto j : sel.neighborhood) {
    lo = std::min(lo, model.years()[j]);
    hi = std::max(hi, model.years()[j]);
  }
  est.details.emplace_back("neighbor_year_min", lo);
  est.details.emplace_back("neighbor_year_max", hi);
  return est;
}

}  // namespace chartdate
