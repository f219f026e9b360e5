#include "chartdate/mt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_set>

#include "chartdate/error.hpp"

namespace chartdate {

namespace {

// States whose subtree holds at least this many prefix end points keep
// their occurrence statistics in the model-wide cache.
constexpr std::size_t kCacheMinPoints = 64;

// Window averages this close to the best (relative) count as ties.
constexpr double kWindowTieTolerance = 1e-12;

}  // namespace

std::vector<std::string> MatchingPattern::words(const Document& target) const {
  const auto first = target.tokens.begin() + static_cast<std::ptrdiff_t>(start);
  return {first, first + length};
}

// ---------------------------------------------------------------------------
// Configuration

MtConfig MtConfig::family(double length_power, double lifetime_scale, double currency_scale) {
  if (!(length_power >= 0.0) || !(lifetime_scale > 0.0) || !(currency_scale > 0.0))
    throw std::invalid_argument("MT family parameters must be positive");
  MtConfig config;
  config.m1 = [length_power](double length) { return std::pow(length, length_power); };
  config.m2 = [lifetime_scale](double lifetime) { return 1.0 / (1.0 + lifetime / lifetime_scale); };
  config.m3 = [currency_scale](double currency) { return 1.0 / (1.0 + currency / currency_scale); };
  return config;
}

void MtConfig::validate() const {
  if (!m1 || !m2 || !m3) throw std::invalid_argument("MT factor functions must be set");
  auto check = [](const std::function<double(double)>& f, bool increasing, const char* name) {
    double prev = f(increasing ? 1.0 : 0.0);
    for (int i = 1; i <= 600; ++i) {
      const double x = increasing ? 1.0 + i : 0.5 * i;
      const double v = f(x);
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string(name) + " must be finite and nonnegative");
      if (increasing ? v < prev : v > prev)
        throw std::invalid_argument(std::string(name) + (increasing ? " must be nondecreasing"
                                                                    : " must be nonincreasing"));
      prev = v;
    }
  };
  check(m1, true, "M1");
  check(m2, false, "M2");
  check(m3, false, "M3");
  if (!(threshold >= 0.0)) throw std::invalid_argument("MT threshold must be nonnegative");
  if (initial_window < 1) throw std::invalid_argument("MT initial window must be >= 1");
  if (!(shrink_factor > 0.0 && shrink_factor < 1.0))
    throw std::invalid_argument("MT shrink factor must lie in (0, 1)");
  if (expand_margin < 0) throw std::invalid_argument("MT expand margin must be >= 0");
  if (max_rounds < 1) throw std::invalid_argument("MT needs at least one refinement round");
}

double mt_value(const MatchingPattern& pattern, const MtConfig& config) {
  return config.m1(pattern.length) * config.m2(pattern.lifetime()) * config.m3(pattern.currency());
}

// ---------------------------------------------------------------------------
// Model

struct MtModel::Cache {
  std::shared_mutex mutex;
  std::unordered_map<SuffixAutomaton::State, std::shared_ptr<const PatternOccurrence>> states;
};

MtModel::MtModel(std::span<const Document> train) : cache_(std::make_unique<Cache>()) {
  if (train.empty()) throw DataError("MT needs a nonempty training set");
  std::vector<std::vector<SuffixAutomaton::Token>> sequences;
  sequences.reserve(train.size());
  for (const auto& doc : train) {
    if (!doc.year) throw DataError("training document '" + doc.id + "' has no year");
    doc_years_.push_back(*doc.year);
    auto& seq = sequences.emplace_back();
    seq.reserve(doc.tokens.size());
    for (const auto& token : doc.tokens) {
      auto [it, inserted] =
          vocab_.try_emplace(token, static_cast<SuffixAutomaton::Token>(vocab_.size()));
      seq.push_back(it->second);
    }
  }
  automaton_ = SuffixAutomaton::build(sequences);

  auto [lo, hi] = std::minmax_element(doc_years_.begin(), doc_years_.end());
  year_min_ = *lo;
  year_max_ = *hi;
  year_docs_.assign(static_cast<std::size_t>(year_max_ - year_min_ + 1), 0);
  for (int y : doc_years_) ++year_docs_[static_cast<std::size_t>(y - year_min_)];
  std::vector<int> sorted = doc_years_;
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  median_ = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

MtModel::~MtModel() = default;
MtModel::MtModel(MtModel&&) noexcept = default;
MtModel& MtModel::operator=(MtModel&&) noexcept = default;

std::size_t MtModel::docs_in_year(int year) const {
  if (year < year_min_ || year > year_max_) return 0;
  return year_docs_[static_cast<std::size_t>(year - year_min_)];
}

std::shared_ptr<const PatternOccurrence> MtModel::occurrence(SuffixAutomaton::State s) const {
  const bool cacheable = automaton_.occurrence_points(s) >= kCacheMinPoints;
  if (cacheable) {
    std::shared_lock lock(cache_->mutex);
    auto it = cache_->states.find(s);
    if (it != cache_->states.end()) return it->second;
  }
  std::map<int, std::int64_t> per_year;
  for (auto doc : automaton_.sequences(s)) ++per_year[doc_years_[doc]];
  auto occ = std::make_shared<PatternOccurrence>();
  occ->first_year = per_year.begin()->first;
  occ->last_year = per_year.rbegin()->first;
  occ->distinct_years = static_cast<int>(per_year.size());
  occ->docs_per_year.reserve(per_year.size());
  for (auto [year, count] : per_year) occ->docs_per_year.push_back({year, count});
  if (!cacheable) return occ;
  std::unique_lock lock(cache_->mutex);
  return cache_->states.try_emplace(s, std::move(occ)).first->second;
}

std::vector<MatchingPattern> MtModel::find_matching_patterns(const Document& target) const {
  const auto m = target.tokens.size();
  std::vector<std::optional<SuffixAutomaton::Token>> ids(m);
  for (std::size_t i = 0; i < m; ++i)
    if (auto it = vocab_.find(target.tokens[i]); it != vocab_.end()) ids[i] = it->second;

  std::vector<MatchingPattern> patterns;
  std::unordered_set<std::uint64_t> seen;  // (state, length)
  std::unordered_map<SuffixAutomaton::State, std::shared_ptr<const PatternOccurrence>> local;
  for (std::size_t i = 0; i < m; ++i) {
    SuffixAutomaton::State state = SuffixAutomaton::kRoot;
    for (std::size_t j = i; j < m; ++j) {
      if (!ids[j]) break;
      auto next = automaton_.next(state, *ids[j]);
      if (!next) break;
      state = *next;
      const auto length = static_cast<std::uint64_t>(j - i + 1);
      if (!seen.insert((static_cast<std::uint64_t>(state) << 32) | length).second) continue;
      auto& occ = local[state];
      if (!occ) occ = occurrence(state);
      patterns.push_back({i, static_cast<int>(length), occ});
    }
  }
  return patterns;
}

// ---------------------------------------------------------------------------
// GMT and refinement

Curve gmt_curve(std::span<const MatchingPattern> patterns, const MtModel& model,
                const MtConfig& config) {
  config.validate();
  const int lo = model.year_min();
  std::vector<double> sums(static_cast<std::size_t>(model.year_max() - lo + 1), 0.0);
  std::size_t used = 0;
  for (const auto& p : patterns) {
    const double mt = mt_value(p, config);
    if (!(mt >= config.threshold)) continue;
    ++used;
    for (const auto& yc : p.occurrence->docs_per_year)
      sums[static_cast<std::size_t>(yc.year - lo)] += mt * static_cast<double>(yc.count);
  }
  if (used == 0) throw DataError("undatable by MT: no matching pattern reaches the threshold");
  Curve curve;
  for (int y = lo; y <= model.year_max(); ++y) {
    const auto n = model.docs_in_year(y);
    if (n == 0) continue;
    curve.push_back({y, sums[static_cast<std::size_t>(y - lo)] / static_cast<double>(n)});
  }
  return curve;
}

Curve gmt_curve(const Document& target, const MtModel& model, const MtConfig& config) {
  const auto patterns = model.find_matching_patterns(target);
  return gmt_curve(patterns, model, config);
}

DateEstimate mt_date_from_curve(const Curve& gmt, const MtModel& model, const MtConfig& config) {
  config.validate();
  if (gmt.empty()) throw DataError("empty GMT curve");

  int range_lo = model.year_min();
  int range_hi = model.year_max();
  int width = config.initial_window;
  int win_lo = range_lo;
  int win_hi = range_hi;
  int rounds = 0;
  for (int round = 0; round < config.max_rounds; ++round) {
    ++rounds;
    const int w = std::min(width, range_hi - range_lo + 1);
    std::optional<double> best;
    int best_lo = range_lo;
    std::vector<std::pair<int, double>> windows;
    for (int a = range_lo; a + w - 1 <= range_hi; ++a) {
      double sum = 0.0;
      int count = 0;
      auto it = std::lower_bound(gmt.begin(), gmt.end(), a,
                                 [](const CurvePoint& p, int y) { return p.year < y; });
      for (; it != gmt.end() && it->year <= a + w - 1; ++it) {
        sum += it->value;
        ++count;
      }
      if (count == 0) continue;
      windows.emplace_back(a, sum / count);
      if (!best || sum / count > *best) best = sum / count;
    }
    if (!best) throw DataError("no GMT value inside the refinement range");
    const double tol = kWindowTieTolerance * std::abs(*best);
    for (auto [a, avg] : windows) {
      if (avg >= *best - tol) {
        best_lo = a;
        break;
      }
    }
    win_lo = best_lo;
    win_hi = best_lo + w - 1;
    if (w <= 1) break;
    range_lo = std::max(model.year_min(), win_lo - config.expand_margin);
    range_hi = std::min(model.year_max(), win_hi + config.expand_margin);
    width = std::max(1, static_cast<int>(std::floor(width * config.shrink_factor)));
  }

  DateEstimate est;
  est.method = "mt";
  est.year_hat = 0.5 * (win_lo + win_hi);
  est.curve = gmt;
  est.details.emplace_back("rounds", rounds);
  est.details.emplace_back("window_lo", win_lo);
  est.details.emplace_back("window_hi", win_hi);
  return est;
}

DateEstimate mt_date(const Document& target, const MtModel& model, const MtConfig& config) {
  const auto patterns = model.find_matching_patterns(target);
  DateEstimate est = mt_date_from_curve(gmt_curve(patterns, model, config), model, config);
  est.details.emplace_back("patterns", static_cast<double>(patterns.size()));
  return est;
}

}  // namespace chartdate
