#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chartdate/corpus.hpp"

namespace chartdate {

enum class TrajectoryShape {
  constant,  ///< 1
  ramp_in,   ///< logistic((t - center) / softness)
  ramp_out,  ///< 1 - ramp_in
  window,    ///< ramp in before center - half_width, out after center + half_width
};

/// Unnormalized time profile of one word's probability. Outside
/// [support_min, support_max] the profile is 0.
struct Trajectory {
  TrajectoryShape shape = TrajectoryShape::constant;
  double weight = 1.0;
  double center = 0.0;
  double half_width = 0.0;
  double softness = 1.0;
  int support_min = std::numeric_limits<int>::min();
  int support_max = std::numeric_limits<int>::max();

  double value(int year) const;
};

enum class DateDistribution {
  uniform,  ///< uniform over [year_min, year_max]
  deeds,    ///< normal(1237, 46) rounded, truncated to [1089, 1438]
};

/// Generative model: given a date t, a document is an i.i.d. sample of
/// words drawn with probabilities pi_s(t) = profile_s(t) / sum profiles.
struct SyntheticModel {
  int year_min = 1100;
  int year_max = 1300;
  std::vector<std::string> words;
  std::vector<Trajectory> trajectories;
  DateDistribution dates = DateDistribution::uniform;
  /// Fixed length, or the median of a lognormal when lognormal_lengths.
  int doc_length = 200;
  bool lognormal_lengths = false;
  /// Mean of the lognormal lengths; with doc_length fixes its sigma.
  double mean_length = 237.0;
  int min_length = 15;
  int max_length = 2054;

  /// pi_s(t) for every word; sums to one.
  std::vector<double> probabilities(int year) const;

  /// Throws std::invalid_argument on an empty vocabulary, mismatched word
  /// and trajectory lists or a year with no probability mass.
  void validate() const;

  /// No two adjacent years share a probability vector, so the date is
  /// recoverable from the word distribution.
  bool identifiable() const;
};

/// Settings of the stock models, read from a flat key = value file.
struct SyntheticSpec {
  /// smooth | two_regime | deeds
  std::string kind = "smooth";
  int vocabulary = 600;
  int year_min = 1100;
  int year_max = 1300;
  /// First year of the second regime (two_regime).
  int regime_year = 1200;
  int doc_length = 200;
  /// Seed for the model's own random structure (trajectory placement).
  std::uint64_t structure_seed = 7;
  /// Zipf exponent of the base weights.
  double zipf = 1.0;
  /// Fraction of words with a constant profile.
  double constant_fraction = 0.3;
};

/// key = value lines; '#' starts a comment. Throws DataError on malformed
/// lines and unknown keys.
SyntheticSpec read_synthetic_spec(std::istream& in);
SyntheticSpec read_synthetic_spec_file(const std::string& path);

/// Stock models:
///  - smooth: constant, ramp and window profiles spread over the range;
///  - two_regime: vocabulary A lives before regime_year, B from it on,
///    each drifting inside its regime;
///  - deeds: smooth profiles over 1089..1438 with normal dates and
///    lognormal lengths (median 202, mean 237).
SyntheticModel make_model(const SyntheticSpec& spec);

/// n documents with ids "synth-000000", ...; deterministic per seed.
std::vector<Document> generate_corpus(const SyntheticModel& model, std::size_t n, std::uint64_t seed);

}  // namespace chartdate
