#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chartdate/corpus.hpp"
#include "chartdate/ensemble.hpp"
#include "chartdate/estimate.hpp"
#include "chartdate/eval.hpp"
#include "chartdate/knn.hpp"
#include "chartdate/mt.hpp"
#include "chartdate/prevalence.hpp"
#include "chartdate/quantile.hpp"

namespace chartdate {

/// Method parameters by name, e.g. {"h": "12", "nu": "3"}.
using ParamMap = std::map<std::string, std::string>;
/// Candidate values per parameter.
using ParamGrid = std::map<std::string, std::vector<std::string>>;

/// The dating methods, in reporting order.
inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"knn", "mp", "qr", "mt"};
  return names;
}

/// Parameter names a method accepts.
const std::vector<std::string>& method_parameters(std::string_view method);

/// "a=1,b=2" in key order.
std::string format_params(const ParamMap& params);

/// Cartesian product in key order, values in the order given. An empty
/// grid yields one empty parameter map.
std::vector<ParamMap> expand_grid(const ParamGrid& grid);

/// Training documents plus lazily built, shared models: shingle indexes
/// per k, vectorized corpora per distance setting, one substring index.
/// Thread-safe.
class TrainingContext {
 public:
  /// Throws DataError when `train` is empty or has undated documents.
  explicit TrainingContext(std::vector<Document> train);

  const std::vector<Document>& train() const { return train_; }
  double median_year() const { return median_; }

  std::shared_ptr<const ShingleIndex> index(int k);
  std::shared_ptr<const KnnModel> knn(const KnnConfig& config);
  std::shared_ptr<const QrModel> qr(const DistanceSpec& distance);
  std::shared_ptr<const MtModel> mt();

 private:
  std::vector<Document> train_;
  double median_ = 0.0;
  std::mutex mutex_;
  std::map<int, std::shared_ptr<const ShingleIndex>> indexes_;
  std::map<std::string, std::shared_ptr<const KnnModel>> knn_;
  std::map<std::string, std::shared_ptr<const QrModel>> qr_;
  std::shared_ptr<const MtModel> mt_;
};

/// A configured dating method bound to a training set.
struct Dater {
  std::string method;
  ParamMap params;
  std::function<DateEstimate(const Document&)> date;
};

/// Throws std::invalid_argument naming the method and parameter on unknown
/// methods, unknown parameters or unparsable values.
Dater make_dater(std::string_view method, const ParamMap& params, TrainingContext& context);

/// Dates every document; documents a method cannot date (DataError,
/// NumericalError) get the training median and are marked as fallbacks.
/// Results are in input order.
std::vector<DocResult> date_documents(const Dater& dater, std::span<const Document> docs,
                                      double fallback_year, std::size_t workers = 0);

struct ProtocolOptions {
  std::vector<std::string> methods{"knn", "mp", "qr", "mt"};
  std::map<std::string, ParamGrid> grids;
  std::uint64_t seed = 1;
  SplitFractions fractions = kReferenceSplit;
  /// Report kNN on validation and test combined.
  bool merge_knn_validation = false;
  /// Fit and report a blend of the tuned methods.
  bool blend = true;
  std::size_t workers = 0;
};

struct GridScore {
  std::string method;
  std::string params;
  double validation_mae = 0.0;
};

struct ProtocolResult {
  std::vector<EvalReport> reports;
  std::vector<GridScore> grid_scores;
  /// "method: message" for every method that failed.
  std::vector<std::string> failures;
  std::optional<BlendWeights> blend;
  std::vector<std::string> blend_methods;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
  std::size_t test_size = 0;
};

/// Splits the dated documents of `corpus`, tunes each method on the
/// validation split by grid search (minimum MAE, first grid point on
/// ties), and reports the tuned configuration on validation and test.
/// Methods fail independently. Deterministic for a given seed.
ProtocolResult run_protocol(std::span<const Document> corpus, const ProtocolOptions& options);

}  // namespace chartdate
