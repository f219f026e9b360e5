#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "chartdate/corpus.hpp"
#include "chartdate/estimate.hpp"
#include "chartdate/suffix_automaton.hpp"

namespace chartdate {

/// Corpus statistics of the training documents containing a substring.
struct PatternOccurrence {
  int first_year = 0;
  int last_year = 0;
  int distinct_years = 0;
  /// Number of training documents containing the substring, per year,
  /// ascending by year.
  std::vector<YearCount> docs_per_year;
};

/// A substring of the target that also occurs in the training corpus.
struct MatchingPattern {
  /// Position of the first occurrence in the target's tokens.
  std::size_t start = 0;
  int length = 0;
  std::shared_ptr<const PatternOccurrence> occurrence;

  int first_year() const { return occurrence->first_year; }
  int last_year() const { return occurrence->last_year; }
  int distinct_years() const { return occurrence->distinct_years; }
  int lifetime() const { return last_year() - first_year(); }
  /// Lifetime divided by the number of distinct years (0 for lifetime 0).
  double currency() const {
    return lifetime() == 0 ? 0.0 : static_cast<double>(lifetime()) / distinct_years();
  }
  std::vector<std::string> words(const Document& target) const;
};

/// Scoring and refinement settings. m1 must be nondecreasing in length,
/// m2 and m3 nonincreasing in lifetime and currency, all nonnegative.
struct MtConfig {
  std::function<double(double)> m1 = [](double length) { return length; };
  std::function<double(double)> m2 = [](double lifetime) { return 1.0 / (1.0 + lifetime / 10.0); };
  std::function<double(double)> m3 = [](double currency) { return 1.0 / (1.0 + currency); };
  /// Patterns with MT below this are ignored.
  double threshold = 0.0;
  int initial_window = 40;
  double shrink_factor = 0.5;
  int expand_margin = 10;
  int max_rounds = 6;

  /// Member of the default families: M1(L) = L^length_power,
  /// M2(f) = 1/(1 + f/lifetime_scale), M3(c) = 1/(1 + c/currency_scale).
  static MtConfig family(double length_power, double lifetime_scale, double currency_scale);

  /// Throws std::invalid_argument when a factor is missing, negative or
  /// breaks its monotonicity on a probe grid, or a refinement setting is
  /// out of range.
  void validate() const;
};

double mt_value(const MatchingPattern& pattern, const MtConfig& config);

/// Training corpus indexed for substring matching.
class MtModel {
 public:
  /// Throws DataError when `train` is empty or holds undated documents.
  explicit MtModel(std::span<const Document> train);
  ~MtModel();
  MtModel(MtModel&&) noexcept;
  MtModel& operator=(MtModel&&) noexcept;

  int year_min() const { return year_min_; }
  int year_max() const { return year_max_; }
  std::size_t size() const { return doc_years_.size(); }
  /// Number of training documents dated `year`.
  std::size_t docs_in_year(int year) const;
  double median_year() const { return median_; }
  const SuffixAutomaton& automaton() const { return automaton_; }

  /// Every distinct substring of `target` occurring in some training
  /// document, in order of first occurrence (start, then length).
  std::vector<MatchingPattern> find_matching_patterns(const Document& target) const;

 private:
  struct Cache;

  std::shared_ptr<const PatternOccurrence> occurrence(SuffixAutomaton::State s) const;

  std::unordered_map<std::string, SuffixAutomaton::Token> vocab_;
  SuffixAutomaton automaton_;
  std::vector<int> doc_years_;
  std::vector<std::size_t> year_docs_;  // indexed by year - year_min_
  int year_min_ = 0;
  int year_max_ = 0;
  double median_ = 0.0;
  std::unique_ptr<Cache> cache_;
};

/// GMT(y) = sum over patterns with MT >= threshold of MT(p) times the
/// number of year-y training documents containing p, divided by the number
/// of year-y training documents. Only years holding training documents
/// appear. Throws DataError when no pattern reaches the threshold.
Curve gmt_curve(const Document& target, const MtModel& model, const MtConfig& config);
Curve gmt_curve(std::span<const MatchingPattern> patterns, const MtModel& model,
                const MtConfig& config);

/// Sliding-window refinement of the GMT curve: pick the window with the
/// largest average GMT, widen it by the margin, shrink the window width,
/// repeat; returns the final window's midpoint.
DateEstimate mt_date(const Document& target, const MtModel& model, const MtConfig& config);
DateEstimate mt_date_from_curve(const Curve& gmt, const MtModel& model, const MtConfig& config);

}  // namespace chartdate
