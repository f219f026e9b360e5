#include "chartdate/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "chartdate/error.hpp"

namespace chartdate {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

constexpr int kDeedsYearMin = 1089;
constexpr int kDeedsYearMax = 1438;
constexpr double kDeedsMean = 1237.0;
constexpr double kDeedsSd = 46.0;

}  // namespace

double Trajectory::value(int year) const {
  if (year < support_min || year > support_max) return 0.0;
  const double t = year;
  switch (shape) {
    case TrajectoryShape::constant:
      return weight;
    case TrajectoryShape::ramp_in:
      return weight * logistic((t - center) / softness);
    case TrajectoryShape::ramp_out:
      return weight * (1.0 - logistic((t - center) / softness));
    case TrajectoryShape::window:
      return weight * logistic((t - (center - half_width)) / softness) *
             logistic(((center + half_width) - t) / softness);
  }
  return 0.0;
}

std::vector<double> SyntheticModel::probabilities(int year) const {
  std::vector<double> p(trajectories.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = trajectories[i].value(year);
    total += p[i];
  }
  if (!(total > 0.0)) throw std::invalid_argument("synthetic model has no mass in year " + std::to_string(year));
  for (double& v : p) v /= total;
  return p;
}

void SyntheticModel::validate() const {
  if (words.empty()) throw std::invalid_argument("synthetic model needs a vocabulary");
  if (words.size() != trajectories.size())
    throw std::invalid_argument("synthetic model needs one trajectory per word");
  if (year_min > year_max) throw std::invalid_argument("synthetic year range is empty");
  if (doc_length < 1 || min_length < 1 || max_length < min_length)
    throw std::invalid_argument("synthetic document lengths must be positive");
  if (lognormal_lengths && !(mean_length > doc_length))
    throw std::invalid_argument("lognormal lengths need mean above median");
  for (const auto& t : trajectories)
    if (!(t.weight >= 0.0) || !(t.softness > 0.0))
      throw std::invalid_argument("trajectory weights must be nonnegative, softness positive");
  for (int y = year_min; y <= year_max; ++y) probabilities(y);
}

bool SyntheticModel::identifiable() const {
  std::vector<double> prev = probabilities(year_min);
  for (int y = year_min + 1; y <= year_max; ++y) {
    std::vector<double> cur = probabilities(y);
    if (cur == prev) return false;
    prev = std::move(cur);
  }
  return true;
}

// ---------------------------------------------------------------------------
// Spec files

SyntheticSpec read_synthetic_spec(std::istream& in) {
  SyntheticSpec spec;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError("model config line " + std::to_string(line_no) + ": expected key = value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "kind") {
        if (value != "smooth" && value != "two_regime" && value != "deeds")
          throw DataError("unknown model kind '" + value + "'");
        spec.kind = value;
      } else if (key == "vocabulary") {
        spec.vocabulary = std::stoi(value);
      } else if (key == "year_min") {
        spec.year_min = std::stoi(value);
      } else if (key == "year_max") {
        spec.year_max = std::stoi(value);
      } else if (key == "regime_year") {
        spec.regime_year = std::stoi(value);
      } else if (key == "doc_length") {
        spec.doc_length = std::stoi(value);
      } else if (key == "structure_seed") {
        spec.structure_seed = std::stoull(value);
      } else if (key == "zipf") {
        spec.zipf = std::stod(value);
      } else if (key == "constant_fraction") {
        spec.constant_fraction = std::stod(value);
      } else {
        throw DataError("unknown key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw DataError("model config line " + std::to_string(line_no) + ": bad value for '" + key + "'");
    } catch (const DataError& e) {
      throw DataError("model config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return spec;
}

SyntheticSpec read_synthetic_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model config '" + path + "'");
  return read_synthetic_spec(in);
}

// ---------------------------------------------------------------------------
// Stock models

namespace {

std::string word_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "w%04d", i);
  return buf;
}

// Random drifting profile placed inside [lo, hi].
Trajectory drifting(std::mt19937_64& rng, double weight, int lo, int hi, double constant_fraction) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Trajectory t;
  t.weight = weight;
  const double u = unit(rng);
  const double span = hi - lo;
  t.center = lo + span * unit(rng);
  t.half_width = span * (0.05 + 0.25 * unit(rng));
  t.softness = std::max(2.0, span * (0.02 + 0.08 * unit(rng)));
  if (u < constant_fraction)
    t.shape = TrajectoryShape::constant;
  else if (u < constant_fraction + (1 - constant_fraction) / 3)
    t.shape = TrajectoryShape::ramp_in;
  else if (u < constant_fraction + 2 * (1 - constant_fraction) / 3)
    t.shape = TrajectoryShape::ramp_out;
  else
    t.shape = TrajectoryShape::window;
  return t;
}

}  // namespace

SyntheticModel make_model(const SyntheticSpec& spec) {
  if (spec.vocabulary < 1) throw std::invalid_argument("vocabulary must be positive");
  if (!(spec.constant_fraction >= 0.0 && spec.constant_fraction <= 1.0))
    throw std::invalid_argument("constant_fraction must lie in [0, 1]");
  SyntheticModel model;
  model.doc_length = spec.doc_length;
  model.year_min = spec.year_min;
  model.year_max = spec.year_max;
  if (spec.kind == "deeds") {
    model.year_min = kDeedsYearMin;
    model.year_max = kDeedsYearMax;
    model.dates = DateDistribution::deeds;
    model.doc_length = 202;
    model.mean_length = 237.0;
    model.lognormal_lengths = true;
  }

  std::mt19937_64 rng(spec.structure_seed);
  const int v = spec.vocabulary;
  for (int i = 0; i < v; ++i) {
    model.words.push_back(word_name(i));
    const double weight = 1.0 / std::pow(i + 1.0, spec.zipf);
    if (spec.kind == "two_regime") {
      const bool first = i % 2 == 0;
      const int lo = first ? model.year_min : spec.regime_year;
      const int hi = first ? spec.regime_year - 1 : model.year_max;
      Trajectory t = drifting(rng, weight, lo, hi, spec.constant_fraction);
      t.support_min = lo;
      t.support_max = hi;
      // Keep every regime's mass positive at each of its years.
      if (i < 2) t.shape = TrajectoryShape::constant;
      model.trajectories.push_back(t);
    } else if (spec.kind == "smooth" || spec.kind == "deeds") {
      Trajectory t = drifting(rng, weight, model.year_min, model.year_max, spec.constant_fraction);
      if (i == 0) t.shape = TrajectoryShape::constant;
      model.trajectories.push_back(t);
    } else {
      throw std::invalid_argument("unknown model kind '" + spec.kind + "'");
    }
  }
  if (spec.kind == "two_regime" &&
      !(spec.regime_year > model.year_min && spec.regime_year <= model.year_max))
    throw std::invalid_argument("regime_year must fall inside the year range");
  model.validate();
  if (!model.identifiable())
    throw std::invalid_argument("model has adjacent years with identical word probabilities");
  return model;
}

// ---------------------------------------------------------------------------
// Generation

std::vector<Document> generate_corpus(const SyntheticModel& model, std::size_t n, std::uint64_t seed) {
  model.validate();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> uniform_year(model.year_min, model.year_max);
  std::normal_distribution<double> deeds_year(kDeedsMean, kDeedsSd);
  const double sigma = model.lognormal_lengths
                           ? std::sqrt(2.0 * std::log(model.mean_length / model.doc_length))
                           : 0.0;
  std::lognormal_distribution<double> length_dist(std::log(static_cast<double>(model.doc_length)),
                                                  sigma > 0.0 ? sigma : 1.0);

  std::vector<std::optional<std::discrete_distribution<std::size_t>>> by_year(
      static_cast<std::size_t>(model.year_max - model.year_min + 1));

  std::vector<Document> docs;
  docs.reserve(n);
  for (std::size_t d = 0; d < n; ++d) {
    int year = 0;
    if (model.dates == DateDistribution::uniform) {
      year = uniform_year(rng);
    } else {
      do {
        year = static_cast<int>(std::lround(deeds_year(rng)));
      } while (year < std::max(model.year_min, kDeedsYearMin) || year > std::min(model.year_max, kDeedsYearMax));
    }
    int length = model.doc_length;
    if (model.lognormal_lengths)
      length = std::clamp(static_cast<int>(std::lround(length_dist(rng))), model.min_length, model.max_length);

    auto& dist = by_year[static_cast<std::size_t>(year - model.year_min)];
    if (!dist) {
      const auto p = model.probabilities(year);
      dist.emplace(p.begin(), p.end());
    }
    Document doc;
    char id[32];
    std::snprintf(id, sizeof id, "synth-%06zu", d);
    doc.id = id;
    doc.year = year;
    doc.tokens.reserve(static_cast<std::size_t>(length));
    for (int i = 0; i < length; ++i) doc.tokens.push_back(model.words[(*dist)(rng)]);
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace chartdate
