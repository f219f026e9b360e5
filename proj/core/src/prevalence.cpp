#include "chartdate/prevalence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "chartdate/error.hpp"

namespace chartdate {

namespace {

constexpr int kMaxNewtonIterations = 50;
constexpr double kScoreTolerance = 1e-8;
constexpr double kLogitClip = 15.0;
constexpr long double kClip = kLogitClip;
// Curves of shingles seen in at least this many years are memoized; rarer
// ones are cheap to recompute.
constexpr std::size_t kCacheMinYears = 8;

long double softplus(long double eta) {
  return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

long double logistic(long double eta) {
  if (eta >= 0) return 1.0L / (1.0L + std::exp(-eta));
  const long double e = std::exp(eta);
  return e / (1.0L + e);
}

long double weight_total(std::span<const LocalObservation> obs) {
  long double total = 0;
  for (const auto& o : obs) total += o.weight;
  return total;
}

struct Derivatives {
  long double g0 = 0, g1 = 0;     // scores
  long double h00 = 0, h01 = 0, h11 = 0;  // negated Hessian
};

Derivatives derivatives(std::span<const LocalObservation> obs, long double w_total,
                        long double b0, long double b1) {
  Derivatives d;
  for (const auto& o : obs) {
    const long double w = o.weight / w_total;
    const long double p = logistic(b0 + b1 * o.x);
    const long double r = w * (o.n - o.total * p);
    d.g0 += r;
    d.g1 += r * o.x;
    const long double v = w * o.total * p * (1 - p);
    d.h00 += v;
    d.h01 += v * o.x;
    d.h11 += v * o.x * o.x;
  }
  return d;
}

long double likelihood(std::span<const LocalObservation> obs, long double w_total, long double b0,
                       long double b1) {
  long double ll = 0;
  for (const auto& o : obs) {
    const long double eta = b0 + b1 * o.x;
    ll += (o.weight / w_total) * (o.n * eta - o.total * softplus(eta));
  }
  return ll;
}

long double max_abs(const Derivatives& d) { return std::max(std::fabs(d.g0), std::fabs(d.g1)); }

}  // namespace

// ---------------------------------------------------------------------------
// Local logistic fit

LocalLogitFit fit_local_logit(std::span<const LocalObservation> obs) {
  std::vector<double> xs;
  for (const auto& o : obs) {
    if (o.weight < 0 || o.n < 0 || o.total < o.n)
      throw std::invalid_argument("local observations need 0 <= n <= total and weight >= 0");
    if (o.weight > 0 && o.total > 0) xs.push_back(o.x);
  }
  std::sort(xs.begin(), xs.end());
  if (std::unique(xs.begin(), xs.end()) - xs.begin() < 2)
    throw std::invalid_argument("local linear fit needs two distinct weighted years");

  const long double w_total = weight_total(obs);
  long double succ = 0, trials = 0;
  for (const auto& o : obs) {
    succ += o.weight * o.n;
    trials += o.weight * o.total;
  }

  LocalLogitFit fit;
  const long double p0 = std::clamp(succ / trials, 1e-12L, 1 - 1e-12L);
  long double b0 = std::clamp(std::log(p0 / (1 - p0)), -kClip, kClip);
  long double b1 = 0;

  auto finish = [&](bool converged) {
    fit.beta0 = static_cast<double>(b0);
    fit.beta1 = static_cast<double>(b1);
    fit.converged = converged;
    return fit;
  };

  for (fit.iterations = 0; fit.iterations < kMaxNewtonIterations; ++fit.iterations) {
    const Derivatives d = derivatives(obs, w_total, b0, b1);
    const long double det = d.h00 * d.h11 - d.h01 * d.h01;
    if (!(det > 0)) return finish(max_abs(d) < kScoreTolerance);
    const long double s0 = (d.h11 * d.g0 - d.h01 * d.g1) / det;
    const long double s1 = (d.h00 * d.g1 - d.h01 * d.g0) / det;

    if (max_abs(d) < kScoreTolerance) {
      // One polishing step, kept only when it does not worsen the scores.
      const Derivatives polished = derivatives(obs, w_total, b0 + s0, b1 + s1);
      if (max_abs(polished) <= max_abs(d) && std::fabs(b0 + s0) <= kLogitClip) {
        b0 += s0;
        b1 += s1;
      }
      return finish(true);
    }

    const long double ll = likelihood(obs, w_total, b0, b1);
    long double step = 1;
    bool moved = false;
    for (int halving = 0; halving < 40; ++halving, step *= 0.5L) {
      const long double c0 = b0 + step * s0;
      const long double c1 = b1 + step * s1;
      if (std::fabs(c0) > kLogitClip) {
        // The optimum runs off to infinity (complete separation); pin the
        // intercept at the clip.
        b0 = std::clamp(c0, -kClip, kClip);
        b1 = c1;
        fit.clipped = true;
        return finish(false);
      }
      if (likelihood(obs, w_total, c0, c1) >= ll - 1e-15L * (1 + std::fabs(ll))) {
        b0 = c0;
        b1 = c1;
        moved = true;
        break;
      }
    }
    if (!moved) return finish(false);
  }
  return finish(max_abs(derivatives(obs, w_total, b0, b1)) < kScoreTolerance);
}

std::array<double, 2> local_logit_scores(std::span<const LocalObservation> obs, double beta0,
                                         double beta1) {
  const Derivatives d = derivatives(obs, weight_total(obs), beta0, beta1);
  return {static_cast<double>(d.g0), static_cast<double>(d.g1)};
}

double local_logit_likelihood(std::span<const LocalObservation> obs, double beta0, double beta1) {
  return static_cast<double>(likelihood(obs, weight_total(obs), beta0, beta1));
}

// ---------------------------------------------------------------------------
// Configuration

void PrevalenceConfig::validate() const {
  if (k < 1) throw std::invalid_argument("prevalence shingle size k must be >= 1");
  if (degree != 0 && degree != 1) throw std::invalid_argument("local polynomial degree must be 0 or 1");
  kernel.validate();
  if (epsilon && !(*epsilon > 0.0 && *epsilon < 1.0))
    throw std::invalid_argument("probability floor must lie in (0, 1)");
}

// ---------------------------------------------------------------------------
// Model

struct PrevalenceModel::Cache {
  std::shared_mutex mutex;
  std::unordered_map<ShingleId, std::shared_ptr<const LogCurve>> curves;
  std::once_flag complement_once;
  std::vector<double> complement;
};

PrevalenceModel::PrevalenceModel(std::shared_ptr<const ShingleIndex> index, PrevalenceConfig config)
    : index_(std::move(index)), config_(std::move(config)), cache_(std::make_unique<Cache>()) {
  config_.validate();
  if (!index_) throw std::invalid_argument("prevalence model needs an index");
  if (index_->k() != config_.k)
    throw std::invalid_argument("index shingle size does not match the configuration");
  epsilon_ = config_.epsilon.value_or(1.0 / (2.0 * static_cast<double>(index_->total_slots())));

  const int lo = index_->year_min();
  const int hi = index_->year_max();
  for (int t = lo; t <= hi; ++t) {
    std::vector<double> w(static_cast<std::size_t>(hi - lo + 1), 0.0);
    double den = 0.0;
    for (int y : index_->years()) {
      const double r = config_.kernel.ratio(static_cast<double>(y - t));
      w[static_cast<std::size_t>(y - lo)] = r;
      den += static_cast<double>(index_->slots(y)) * r;
    }
    if (den > 0.0 && std::isfinite(den)) {
      eval_years_.push_back(t);
      weights_.push_back(std::move(w));
      denominators_.push_back(den);
    }
  }
}

PrevalenceModel::PrevalenceModel(std::span<const Document> train, PrevalenceConfig config)
    : PrevalenceModel(std::make_shared<const ShingleIndex>(ShingleIndex::build(train, config.k)),
                      config) {}

PrevalenceModel::~PrevalenceModel() = default;
PrevalenceModel::PrevalenceModel(PrevalenceModel&&) noexcept = default;
PrevalenceModel& PrevalenceModel::operator=(PrevalenceModel&&) noexcept = default;

double PrevalenceModel::nw(std::optional<ShingleId> id, int t) const {
  double den = 0.0;
  for (int y : index_->years())
    den += static_cast<double>(index_->slots(y)) * config_.kernel.ratio(static_cast<double>(y - t));
  if (!(den > 0.0)) throw NumericalError("no training mass near year " + std::to_string(t));
  if (!id) return 0.0;
  double num = 0.0;
  for (const auto& yc : index_->year_counts(*id))
    num += static_cast<double>(yc.count) * config_.kernel.ratio(static_cast<double>(yc.year - t));
  return num / den;
}

double PrevalenceModel::pi_hat_nw(std::string_view key, int t) const { return nw(index_->find(key), t); }
double PrevalenceModel::pi_hat_nw(ShingleId id, int t) const { return nw(id, t); }

std::vector<LocalObservation> PrevalenceModel::local_observations(std::optional<ShingleId> id,
                                                                  int t) const {
  std::vector<LocalObservation> obs;
  std::span<const YearCount> counts;
  if (id) counts = index_->year_counts(*id);
  auto it = counts.begin();
  for (int y : index_->years()) {
    const double w = config_.kernel.ratio(static_cast<double>(y - t));
    while (it != counts.end() && it->year < y) ++it;
    const double n = it != counts.end() && it->year == y ? static_cast<double>(it->count) : 0.0;
    if (w > 0.0) obs.push_back({static_cast<double>(y - t), n, static_cast<double>(index_->slots(y)), w});
  }
  return obs;
}

ShingleProbability PrevalenceModel::pi_hat_ll(ShingleId id, int t) const {
  const auto obs = local_observations(id, t);
  std::size_t weighted = 0;
  for (const auto& o : obs)
    if (o.weight > 0.0 && o.total > 0.0) ++weighted;
  if (weighted < 2) return {nw(id, t), true, false};
  const LocalLogitFit fit = fit_local_logit(obs);
  if (fit.clipped) return {static_cast<double>(logistic(fit.beta0)), false, true};
  if (!fit.converged) return {nw(id, t), true, false};
  return {static_cast<double>(logistic(fit.beta0)), false, false};
}

ShingleProbability PrevalenceModel::pi_hat_ll(std::string_view key, int t) const {
  auto id = index_->find(key);
  if (!id) {
    // Never observed: the likelihood is maximized at the lower clip.
    nw(std::nullopt, t);
    return {static_cast<double>(logistic(-kLogitClip)), false, true};
  }
  return pi_hat_ll(*id, t);
}

ShingleProbability PrevalenceModel::pi_hat(ShingleId id, int t) const {
  if (config_.degree == 0) return {nw(id, t), false, false};
  return pi_hat_ll(id, t);
}

LogCurve PrevalenceModel::compute_log_curve(ShingleId id) const {
  LogCurve curve;
  curve.values.resize(eval_years_.size());
  const double log_eps = std::log(epsilon_);
  if (config_.degree == 0) {
    const int lo = index_->year_min();
    const auto counts = index_->year_counts(id);
    for (std::size_t e = 0; e < eval_years_.size(); ++e) {
      double num = 0.0;
      for (const auto& yc : counts)
        num += static_cast<double>(yc.count) * weights_[e][static_cast<std::size_t>(yc.year - lo)];
      const double p = num / denominators_[e];
      curve.values[e] = p > epsilon_ ? std::log(p) : log_eps;
    }
    return curve;
  }
  for (std::size_t e = 0; e < eval_years_.size(); ++e) {
    const ShingleProbability p = pi_hat_ll(id, eval_years_[e]);
    curve.nw_fallback = curve.nw_fallback || p.nw_fallback;
    curve.clipped = curve.clipped || p.clipped;
    curve.values[e] = p.value > epsilon_ ? std::log(p.value) : log_eps;
  }
  return curve;
}

std::shared_ptr<const LogCurve> PrevalenceModel::log_curve(ShingleId id) const {
  const bool cacheable = config_.degree == 1 || index_->year_counts(id).size() >= kCacheMinYears;
  if (!cacheable) return std::make_shared<const LogCurve>(compute_log_curve(id));
  {
    std::shared_lock lock(cache_->mutex);
    auto it = cache_->curves.find(id);
    if (it != cache_->curves.end()) return it->second;
  }
  auto curve = std::make_shared<const LogCurve>(compute_log_curve(id));
  std::unique_lock lock(cache_->mutex);
  return cache_->curves.try_emplace(id, std::move(curve)).first->second;
}

namespace {
double log_complement(double p, double eps) { return std::log1p(-std::min(p, 1.0 - eps)); }
}  // namespace

const std::vector<double>& PrevalenceModel::log_complement_total() const {
  std::call_once(cache_->complement_once, [&] {
    std::vector<double> total(eval_years_.size(), 0.0);
    const int lo = index_->year_min();
    std::vector<double> p(eval_years_.size());
    for (ShingleId id = 0; id < index_->shingle_count(); ++id) {
      if (config_.degree == 0) {
        const auto counts = index_->year_counts(id);
        for (std::size_t e = 0; e < eval_years_.size(); ++e) {
          double num = 0.0;
          for (const auto& yc : counts)
            num += static_cast<double>(yc.count) * weights_[e][static_cast<std::size_t>(yc.year - lo)];
          p[e] = num / denominators_[e];
        }
      } else {
        for (std::size_t e = 0; e < eval_years_.size(); ++e) p[e] = pi_hat_ll(id, eval_years_[e]).value;
      }
      for (std::size_t e = 0; e < eval_years_.size(); ++e) total[e] += log_complement(p[e], epsilon_);
    }
    cache_->complement = std::move(total);
  });
  return cache_->complement;
}

// ---------------------------------------------------------------------------
// Prevalence function and dating

PrevalenceCurve prevalence_curve(const Document& doc, const PrevalenceModel& model) {
  const ShingleIndex& index = model.index();
  std::map<ShingleId, int> multiplicity;
  PrevalenceCurve out;
  for (const auto& key : shingle_keys(doc, model.config().k)) {
    if (auto id = index.find(key)) {
      int& m = multiplicity[*id];
      m = model.config().distinct_shingles ? 1 : m + 1;
    } else {
      ++out.unknown_shingles;
    }
  }
  if (multiplicity.empty())
    throw DataError("undatable document '" + doc.id + "': no shingle known to the training index");
  if (model.eval_years().empty()) throw NumericalError("no year carries kernel mass");

  out.years = model.eval_years();
  out.log_values.assign(out.years.size(), 0.0);
  for (const auto& [id, count] : multiplicity) {
    const auto curve = model.log_curve(id);
    out.nw_fallback = out.nw_fallback || curve->nw_fallback;
    out.clipped = out.clipped || curve->clipped;
    for (std::size_t e = 0; e < out.years.size(); ++e) out.log_values[e] += count * curve->values[e];
    out.used_shingles += static_cast<std::size_t>(count);
  }

  const double best = *std::max_element(out.log_values.begin(), out.log_values.end());
  const double tol = 1e-9 * std::max(1.0, std::abs(best));
  const double median = index.median_year();
  std::optional<int> chosen;
  std::size_t tied = 0;
  for (std::size_t e = 0; e < out.years.size(); ++e) {
    if (out.log_values[e] < best - tol) continue;
    ++tied;
    const int y = out.years[e];
    if (!chosen || std::abs(y - median) < std::abs(*chosen - median)) chosen = y;
  }
  out.argmax_year = *chosen;
  out.tie = tied > 1;
  return out;
}

DateEstimate mp_date(const Document& doc, const PrevalenceModel& model) {
  const PrevalenceCurve pc = prevalence_curve(doc, model);
  DateEstimate est;
  est.method = "mp";
  est.year_hat = pc.argmax_year;
  est.curve.reserve(pc.years.size());
  for (std::size_t e = 0; e < pc.years.size(); ++e) est.curve.push_back({pc.years[e], pc.log_values[e]});
  if (pc.tie) est.add_flag(flags::kTie);
  if (pc.nw_fallback) est.add_flag(flags::kNwFallback);
  if (pc.clipped) est.add_flag(flags::kClippedLogit);
  if (pc.unknown_shingles > 0) est.add_flag(flags::kUnknownShingles);
  if (pc.used_shingles < model.config().min_shingles) est.add_flag(flags::kLowConfidence);
  if (pc.argmax_year == pc.years.front() || pc.argmax_year == pc.years.back())
    est.add_flag(flags::kEdgeBias);
  est.details.emplace_back("shingles", static_cast<double>(pc.used_shingles));
  est.details.emplace_back("unknown_shingles", static_cast<double>(pc.unknown_shingles));
  return est;
}

Curve complement_diagnostic(const Document& doc, const PrevalenceModel& model) {
  std::vector<double> values = model.log_complement_total();
  std::unordered_set<ShingleId> present;
  for (const auto& key : shingle_keys(doc, model.config().k))
    if (auto id = model.index().find(key)) present.insert(*id);
  const auto& years = model.eval_years();
  if (present.size() == model.index().shingle_count()) {
    values.assign(years.size(), 0.0);
    present.clear();
  }
  std::vector<ShingleId> ids(present.begin(), present.end());
  std::sort(ids.begin(), ids.end());
  for (ShingleId id : ids)
    for (std::size_t e = 0; e < years.size(); ++e)
      values[e] -= log_complement(model.pi_hat(id, years[e]).value, model.epsilon());
  Curve curve;
  curve.reserve(years.size());
  for (std::size_t e = 0; e < years.size(); ++e) curve.push_back({years[e], values[e]});
  return curve;
}

}  // namespace chartdate
