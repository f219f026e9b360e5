#include "chartdate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "chartdate/error.hpp"

namespace chartdate {

std::string_view to_string(VectorMode mode) {
  switch (mode) {
    case VectorMode::raw:
      return "raw";
    case VectorMode::normalized:
      return "normalized";
    case VectorMode::incidence:
      return "incidence";
  }
  return "unknown";
}

VectorMode parse_vector_mode(std::string_view name) {
  if (name == "raw") return VectorMode::raw;
  if (name == "normalized") return VectorMode::normalized;
  if (name == "incidence") return VectorMode::incidence;
  throw std::invalid_argument("unknown vector mode '" + std::string(name) + "'");
}

std::string_view to_string(DistanceFamily family) {
  switch (family) {
    case DistanceFamily::sim_gamma:
      return "sim_gamma";
    case DistanceFamily::sim_alpha:
      return "dist_alpha";
    case DistanceFamily::broder:
      return "broder";
  }
  return "unknown";
}

DistanceFamily parse_distance_family(std::string_view name) {
  if (name == "sim_gamma" || name == "gamma" || name == "cosine") return DistanceFamily::sim_gamma;
  if (name == "sim_alpha" || name == "dist_alpha" || name == "alpha") return DistanceFamily::sim_alpha;
  if (name == "broder" || name == "resemblance") return DistanceFamily::broder;
  throw std::invalid_argument("unknown distance family '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// CountVector

CountVector CountVector::from_counts(std::vector<Entry> counts, VectorMode mode) {
  std::sort(counts.begin(), counts.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  CountVector v;
  v.mode_ = mode;
  for (const auto& [id, value] : counts) {
    if (!(value >= 0.0) || !std::isfinite(value))
      throw std::invalid_argument("count vector entries must be finite and nonnegative");
    if (!v.entries_.empty() && v.entries_.back().first == id)
      v.entries_.back().second += value;
    else
      v.entries_.emplace_back(id, value);
  }
  std::erase_if(v.entries_, [](const Entry& e) { return e.second == 0.0; });

  if (mode == VectorMode::normalized) {
    double total = 0.0;
    for (const auto& e : v.entries_) total += e.second;
    for (auto& e : v.entries_) e.second /= total;
  } else if (mode == VectorMode::incidence) {
    for (auto& e : v.entries_) e.second = 1.0;
  }
  for (const auto& e : v.entries_) v.max_ = std::max(v.max_, e.second);
  return v;
}

CountVector CountVector::from_dense(std::span<const double> values, VectorMode mode) {
  std::vector<Entry> counts;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] != 0.0) counts.emplace_back(static_cast<std::uint32_t>(i), values[i]);
  return from_counts(std::move(counts), mode);
}

// ---------------------------------------------------------------------------
// Vocabulary and vectorization

std::uint32_t ShingleVocabulary::intern(std::string_view key) {
  auto [it, inserted] = ids_.try_emplace(std::string(key), static_cast<std::uint32_t>(ids_.size()));
  return it->second;
}

std::optional<std::uint32_t> ShingleVocabulary::find(std::string_view key) const {
  auto it = ids_.find(std::string(key));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

CountVector vectorize(const Document& doc, int k, VectorMode mode, ShingleVocabulary& vocab) {
  std::vector<CountVector::Entry> counts;
  for (const auto& key : shingle_keys(doc, k)) counts.emplace_back(vocab.intern(key), 1.0);
  return CountVector::from_counts(std::move(counts), mode);
}

CountVector vectorize_frozen(const Document& doc, int k, VectorMode mode,
                             const ShingleVocabulary& vocab) {
  std::vector<CountVector::Entry> counts;
  std::unordered_map<std::string, std::uint32_t> unseen;
  const auto base = static_cast<std::uint32_t>(vocab.size());
  for (auto& key : shingle_keys(doc, k)) {
    if (auto id = vocab.find(key)) {
      counts.emplace_back(*id, 1.0);
    } else {
      auto [it, inserted] = unseen.try_emplace(std::move(key), base + static_cast<std::uint32_t>(unseen.size()));
      counts.emplace_back(it->second, 1.0);
    }
  }
  return CountVector::from_counts(std::move(counts), mode);
}

// ---------------------------------------------------------------------------
// Similarities

//
// Both similarities are computed on rescaled vectors so that every entry is
// at most 1 before exponentiation: Sim_gamma is invariant to scaling p and q
// separately, Sim_alpha to scaling both by the same constant. This keeps
// p^(2 exponent) finite for large counts and exponents.

namespace {
inline double power(double x, double e) { return e == 1.0 ? x : std::pow(x, e); }
}  // namespace

double sim_gamma(const CountVector& p, const CountVector& q, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  if (p.is_zero() || q.is_zero()) throw NumericalError("sim_gamma of a zero vector is undefined");
  const double sp = p.max_value();
  const double sq = q.max_value();

  double norm_p = 0.0;
  for (const auto& [id, value] : p.entries()) {
    const double a = power(value / sp, gamma);
    norm_p += a * a;
  }
  double norm_q = 0.0;
  for (const auto& [id, value] : q.entries()) {
    const double b = power(value / sq, gamma);
    norm_q += b * b;
  }

  double dot = 0.0;
  auto pi = p.entries().begin();
  auto qi = q.entries().begin();
  while (pi != p.entries().end() && qi != q.entries().end()) {
    if (pi->first < qi->first) {
      ++pi;
    } else if (qi->first < pi->first) {
      ++qi;
    } else {
      dot += power(pi->second / sp, gamma) * power(qi->second / sq, gamma);
      ++pi;
      ++qi;
    }
  }
  const double denom = std::sqrt(norm_p * norm_q);
  return std::clamp(dot / denom, 0.0, 1.0);
}

namespace {

struct AlphaSums {
  double sum_p = 0.0;
  double sum_q = 0.0;
  double cross = 0.0;
  // sum_p + sum_q is evaluated identically for (p, q) and (q, p), and for
  // p == q the expression reduces exactly to cross.
  double denom() const { return (sum_p + sum_q) - cross; }
};

AlphaSums alpha_sums(const CountVector& p, const CountVector& q, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (p.is_zero() && q.is_zero()) throw NumericalError("sim_alpha of two zero vectors is undefined");
  const double scale = std::max(p.max_value(), q.max_value());

  AlphaSums s;
  for (const auto& [id, value] : p.entries()) {
    const double a = power(value / scale, alpha);
    s.sum_p += a * a;
  }
  for (const auto& [id, value] : q.entries()) {
    const double b = power(value / scale, alpha);
    s.sum_q += b * b;
  }
  auto pi = p.entries().begin();
  auto qi = q.entries().begin();
  while (pi != p.entries().end() && qi != q.entries().end()) {
    if (pi->first < qi->first) {
      ++pi;
    } else if (qi->first < pi->first) {
      ++qi;
    } else {
      s.cross += power(pi->second / scale, alpha) * power(qi->second / scale, alpha);
      ++pi;
      ++qi;
    }
  }
  if (!(s.denom() > 0.0)) throw NumericalError("sim_alpha denominator is zero");
  return s;
}

}  // namespace

double sim_alpha(const CountVector& p, const CountVector& q, double alpha) {
  const AlphaSums s = alpha_sums(p, q, alpha);
  return std::clamp(s.cross / s.denom(), 0.0, 1.0);
}

namespace {

// Distances are rounded up to multiples of 2^-40. Ceiling is monotone and
// subadditive and sums of two grid values are exact doubles, so a triangle
// inequality that holds for the exact values holds for the returned ones.
constexpr int kGridBits = 40;

double ceil_to_grid(double x) { return std::ldexp(std::ceil(std::ldexp(x, kGridBits)), -kGridBits); }

__extension__ typedef unsigned __int128 Wide;

// ceil(num / den * 2^40) / 2^40 in integer arithmetic.
double ceil_to_grid(std::size_t num, std::size_t den) {
  const Wide scaled = static_cast<Wide>(num) << kGridBits;
  const auto units = static_cast<std::uint64_t>((scaled + den - 1) / den);
  return std::ldexp(static_cast<double>(units), -kGridBits);
}

}  // namespace

double dist_alpha(const CountVector& p, const CountVector& q, double alpha) {
  const AlphaSums s = alpha_sums(p, q, alpha);
  return ceil_to_grid(std::clamp((s.denom() - s.cross) / s.denom(), 0.0, 1.0));
}

namespace {

struct SupportOverlap {
  std::size_t common = 0;
  std::size_t unioned = 0;
};

SupportOverlap support_overlap(const CountVector& p, const CountVector& q) {
  if (p.is_zero() || q.is_zero()) throw DataError("resemblance needs at least one shingle per document");
  std::size_t common = 0;
  auto pi = p.entries().begin();
  auto qi = q.entries().begin();
  while (pi != p.entries().end() && qi != q.entries().end()) {
    if (pi->first < qi->first) {
      ++pi;
    } else if (qi->first < pi->first) {
      ++qi;
    } else {
      ++common;
      ++pi;
      ++qi;
    }
  }
  return {common, p.nonzeros() + q.nonzeros() - common};
}

}  // namespace

double support_resemblance(const CountVector& p, const CountVector& q) {
  const auto o = support_overlap(p, q);
  return static_cast<double>(o.common) / static_cast<double>(o.unioned);
}

double support_distance(const CountVector& p, const CountVector& q) {
  const auto o = support_overlap(p, q);
  return ceil_to_grid(o.unioned - o.common, o.unioned);
}

double broder_resemblance(const Document& d1, const Document& d2, int k) {
  ShingleVocabulary vocab;
  const auto p = vectorize(d1, k, VectorMode::incidence, vocab);
  const auto q = vectorize(d2, k, VectorMode::incidence, vocab);
  return support_resemblance(p, q);
}

double broder_distance(const Document& d1, const Document& d2, int k) {
  ShingleVocabulary vocab;
  const auto p = vectorize(d1, k, VectorMode::incidence, vocab);
  const auto q = vectorize(d2, k, VectorMode::incidence, vocab);
  return support_distance(p, q);
}

// ---------------------------------------------------------------------------
// DistanceSpec

void DistanceSpec::validate() const {
  if (k < 1) throw std::invalid_argument("distance shingle size k must be >= 1");
  if (family != DistanceFamily::broder && !(exponent > 0.0))
    throw std::invalid_argument("distance exponent must be > 0");
}

std::string DistanceSpec::describe() const {
  std::ostringstream out;
  out << to_string(family);
  if (family != DistanceFamily::broder) out << "(exp=" << exponent << "," << to_string(mode) << ")";
  out << "/k=" << k;
  return out.str();
}

double distance(const DistanceSpec& spec, const CountVector& p, const CountVector& q) {
  switch (spec.family) {
    case DistanceFamily::sim_gamma:
      return 1.0 - sim_gamma(p, q, spec.exponent);
    case DistanceFamily::sim_alpha:
      return dist_alpha(p, q, spec.exponent);
    case DistanceFamily::broder:
      return support_distance(p, q);
  }
  throw std::invalid_argument("unknown distance family");
}

// ---------------------------------------------------------------------------
// VectorizedCorpus

namespace {
VectorMode effective_mode(const DistanceSpec& spec) {
  return spec.family == DistanceFamily::broder ? VectorMode::incidence : spec.mode;
}
}  // namespace

VectorizedCorpus::VectorizedCorpus(std::span<const Document> docs, DistanceSpec spec)
    : spec_(spec) {
  spec_.validate();
  vectors_.reserve(docs.size());
  for (const auto& doc : docs) vectors_.push_back(chartdate::vectorize(doc, spec_.k, effective_mode(spec_), vocab_));
}

CountVector VectorizedCorpus::vectorize(const Document& doc) const {
  return vectorize_frozen(doc, spec_.k, effective_mode(spec_), vocab_);
}

double VectorizedCorpus::guarded(const CountVector& a, const CountVector& b) const {
  if (a.is_zero() || b.is_zero()) return 1.0;
  return chartdate::distance(spec_, a, b);
}

std::vector<double> VectorizedCorpus::distances_to(const CountVector& v) const {
  if (v.is_zero())
    throw DataError("document has no " + std::to_string(spec_.k) + "-shingle to compare");
  std::vector<double> out(vectors_.size());
  for (std::size_t i = 0; i < vectors_.size(); ++i) out[i] = guarded(v, vectors_[i]);
  return out;
}

double VectorizedCorpus::distance(std::size_t i, std::size_t j) const {
  return guarded(vectors_[i], vectors_[j]);
}

}  // namespace chartdate
