#include "chartdate/protocol.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "chartdate/error.hpp"
#include "chartdate/parallel.hpp"

namespace chartdate {

const std::vector<std::string>& method_parameters(std::string_view method) {
  static const std::map<std::string, std::vector<std::string>, std::less<>> params{
      {"knn", {"k", "m", "family", "exponent", "mode", "kernel", "nu"}},
      {"mp", {"k", "h", "nu", "kernel", "degree", "epsilon", "distinct"}},
      {"qr", {"q", "h", "kernel", "nu", "k", "family", "exponent", "mode", "min_mass", "variable"}},
      {"mt",
       {"threshold", "window", "shrink", "margin", "rounds", "length_power", "lifetime_scale",
        "currency_scale"}},
  };
  auto it = params.find(method);
  if (it == params.end()) throw std::invalid_argument("unknown method '" + std::string(method) + "'");
  return it->second;
}

std::string format_params(const ParamMap& params) {
  std::string out;
  for (const auto& [key, value] : params) {
    if (!out.empty()) out += ',';
    out += key + '=' + value;
  }
  return out;
}

std::vector<ParamMap> expand_grid(const ParamGrid& grid) {
  std::vector<ParamMap> out{ParamMap{}};
  for (const auto& [key, values] : grid) {
    if (values.empty()) throw std::invalid_argument("grid for '" + key + "' has no values");
    std::vector<ParamMap> next;
    for (const auto& partial : out) {
      for (const auto& v : values) {
        ParamMap m = partial;
        m[key] = v;
        next.push_back(std::move(m));
      }
    }
    out = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training context

TrainingContext::TrainingContext(std::vector<Document> train) : train_(std::move(train)) {
  if (train_.empty()) throw DataError("training split is empty");
  std::vector<int> years;
  for (const auto& doc : train_) {
    if (!doc.year) throw DataError("training document '" + doc.id + "' has no year");
    years.push_back(*doc.year);
  }
  std::sort(years.begin(), years.end());
  const auto n = years.size();
  median_ = n % 2 == 1 ? years[n / 2] : 0.5 * (years[n / 2 - 1] + years[n / 2]);
}

std::shared_ptr<const ShingleIndex> TrainingContext::index(int k) {
  std::lock_guard lock(mutex_);
  auto& slot = indexes_[k];
  if (!slot) slot = std::make_shared<const ShingleIndex>(ShingleIndex::build(train_, k));
  return slot;
}

std::shared_ptr<const KnnModel> TrainingContext::knn(const KnnConfig& config) {
  std::string key;
  for (std::size_t i = 0; i < config.distances.size(); ++i)
    key += config.distances[i].describe() + "|" + config.kernels[i].describe() + ";";
  std::lock_guard lock(mutex_);
  auto& slot = knn_[key];
  if (!slot) {
    KnnConfig base = config;
    base.m = 2;
    slot = std::make_shared<const KnnModel>(train_, base);
  }
  return std::make_shared<const KnnModel>(slot->with_neighborhood(config.m));
}

std::shared_ptr<const QrModel> TrainingContext::qr(const DistanceSpec& distance) {
  std::lock_guard lock(mutex_);
  auto& slot = qr_[distance.describe()];
  if (!slot) slot = std::make_shared<const QrModel>(train_, distance);
  return slot;
}

std::shared_ptr<const MtModel> TrainingContext::mt() {
  std::lock_guard lock(mutex_);
  if (!mt_) mt_ = std::make_shared<const MtModel>(train_);
  return mt_;
}

// ---------------------------------------------------------------------------
// Daters

namespace {

class Params {
 public:
  Params(std::string_view method, const ParamMap& params) : method_(method), params_(params) {
    const auto& known = method_parameters(method);
    for (const auto& [key, value] : params)
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw std::invalid_argument("unknown parameter '" + method_ + "." + key + "'");
  }

  std::string text(const std::string& key, std::string fallback) const {
    auto it = params_.find(key);
    return it == params_.end() ? fallback : it->second;
  }

  double number(const std::string& key, double fallback) const {
    auto it = params_.find(key);
    if (it == params_.end()) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size() || !std::isfinite(v)) throw std::invalid_argument("");
      return v;
    } catch (const std::logic_error&) {
      throw std::invalid_argument(name(key) + ": expected a number, got '" + it->second + "'");
    }
  }

  int integer(const std::string& key, int fallback) const {
    auto it = params_.find(key);
    if (it == params_.end()) return fallback;
    int v = 0;
    const auto& s = it->second;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw std::invalid_argument(name(key) + ": expected an integer, got '" + s + "'");
    return v;
  }

  bool flag(const std::string& key, bool fallback) const {
    auto it = params_.find(key);
    if (it == params_.end()) return fallback;
    if (it->second == "1" || it->second == "true") return true;
    if (it->second == "0" || it->second == "false") return false;
    throw std::invalid_argument(name(key) + ": expected 0 or 1, got '" + it->second + "'");
  }

  std::vector<int> integers(const std::string& key, int fallback) const {
    auto it = params_.find(key);
    if (it == params_.end()) return {fallback};
    std::vector<int> out;
    std::string_view s = it->second;
    while (true) {
      const auto plus = s.find('+');
      const std::string_view part = s.substr(0, plus);
      int v = 0;
      auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
      if (part.empty() || ec != std::errc() || ptr != part.data() + part.size())
        throw std::invalid_argument(name(key) + ": expected integers joined by '+', got '" + it->second + "'");
      out.push_back(v);
      if (plus == std::string_view::npos) break;
      s.remove_prefix(plus + 1);
    }
    return out;
  }

  template <typename F>
  auto parsed(const std::string& key, const std::string& fallback, F parse) const {
    try {
      return parse(text(key, fallback));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(name(key) + ": " + e.what());
    }
  }

  std::string name(const std::string& key) const { return method_ + "." + key; }

 private:
  std::string method_;
  const ParamMap& params_;
};

template <typename F>
auto checked(const Params& p, const std::string& key, F&& body) {
  try {
    return body();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(p.name(key) + ": " + e.what());
  }
}

DistanceSpec distance_from(const Params& p, int k) {
  DistanceSpec d;
  d.family = p.parsed("family", "dist_alpha", [](const std::string& s) { return parse_distance_family(s); });
  d.exponent = p.number("exponent", 1.0);
  d.mode = p.parsed("mode", "raw", [](const std::string& s) { return parse_vector_mode(s); });
  d.k = k;
  checked(p, "exponent", [&] { d.validate(); });
  return d;
}

KernelSpec kernel_from(const Params& p, const std::string& shape, double h, double nu) {
  KernelSpec kernel;
  kernel.shape = p.parsed("kernel", shape, [](const std::string& s) { return parse_kernel_shape(s); });
  kernel.bandwidth = p.number("h", h);
  kernel.nu = p.number("nu", nu);
  checked(p, "h", [&] { kernel.validate(); });
  return kernel;
}

}  // namespace

Dater make_dater(std::string_view method, const ParamMap& params, TrainingContext& context) {
  Params p(method, params);
  Dater dater{std::string(method), params, {}};

  if (method == "knn") {
    KnnConfig config;
    config.distances.clear();
    config.kernels.clear();
    KernelSpec kernel;
    kernel.shape = p.parsed("kernel", "gaussian", [](const std::string& s) { return parse_kernel_shape(s); });
    kernel.nu = p.number("nu", 3.0);
    for (int k : p.integers("k", 1)) {
      config.distances.push_back(distance_from(p, k));
      config.kernels.push_back(kernel);
    }
    const int m = p.integer("m", 20);
    config.m = std::min<int>(m, static_cast<int>(context.train().size()));
    checked(p, "m", [&] { config.validate(); });
    auto model = context.knn(config);
    dater.date = [model](const Document& doc) { return knn_date(doc, *model); };
  } else if (method == "mp") {
    PrevalenceConfig config;
    config.k = p.integer("k", 2);
    config.kernel = kernel_from(p, "student_t", 12.0, 3.0);
    config.degree = p.integer("degree", 0);
    if (params.count("epsilon")) config.epsilon = p.number("epsilon", 0.0);
    config.distinct_shingles = p.flag("distinct", false);
    checked(p, "k", [&] { config.validate(); });
    auto model = std::make_shared<const PrevalenceModel>(context.index(config.k), config);
    dater.date = [model](const Document& doc) { return mp_date(doc, *model); };
  } else if (method == "qr") {
    QrConfig config;
    config.q = p.number("q", 0.1);
    config.kernel = kernel_from(p, "gaussian", 30.0, 3.0);
    config.min_mass = p.number("min_mass", 20.0);
    config.variable_bandwidth = p.flag("variable", false);
    checked(p, "q", [&] { config.validate(); });
    auto model = context.qr(distance_from(p, p.integer("k", 1)));
    dater.date = [model, config](const Document& doc) { return qr_date(doc, *model, config); };
  } else if (method == "mt") {
    MtConfig config = checked(p, "length_power", [&] {
      return MtConfig::family(p.number("length_power", 1.0), p.number("lifetime_scale", 10.0),
                              p.number("currency_scale", 1.0));
    });
    config.threshold = p.number("threshold", 0.0);
    config.initial_window = p.integer("window", 40);
    config.shrink_factor = p.number("shrink", 0.5);
    config.expand_margin = p.integer("margin", 10);
    config.max_rounds = p.integer("rounds", 6);
    checked(p, "threshold", [&] { config.validate(); });
    auto model = context.mt();
    dater.date = [model, config](const Document& doc) { return mt_date(doc, *model, config); };
  } else {
    throw std::invalid_argument("unknown method '" + std::string(method) + "'");
  }
  return dater;
}

std::vector<DocResult> date_documents(const Dater& dater, std::span<const Document> docs,
                                      double fallback_year, std::size_t workers) {
  std::vector<DocResult> out(docs.size());
  parallel_for(
      docs.size(),
      [&](std::size_t i) {
        const Document& doc = docs[i];
        DocResult r;
        r.id = doc.id;
        r.truth = doc.year ? *doc.year : std::nan("");
        try {
          r.estimate = dater.date(doc).year_hat;
        } catch (const DataError&) {
          r.estimate = fallback_year;
          r.fallback = true;
        } catch (const NumericalError&) {
          r.estimate = fallback_year;
          r.fallback = true;
        }
        r.abs_error = std::abs(r.estimate - r.truth);
        out[i] = std::move(r);
      },
      workers);
  return out;
}

// ---------------------------------------------------------------------------
// Protocol

namespace {

double mae_of(const std::vector<DocResult>& results) {
  double sum = 0.0;
  for (const auto& r : results) sum += r.abs_error;
  return sum / static_cast<double>(results.size());
}

}  // namespace

ProtocolResult run_protocol(std::span<const Document> corpus, const ProtocolOptions& options) {
  std::vector<Document> dated;
  for (const auto& doc : corpus)
    if (doc.year) dated.push_back(doc);
  for (const auto& [method, grid] : options.grids) {
    if (std::find(options.methods.begin(), options.methods.end(), method) == options.methods.end())
      throw std::invalid_argument("grid given for method '" + method + "' which is not selected");
    const auto& known = method_parameters(method);
    for (const auto& [key, values] : grid)
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw std::invalid_argument("unknown parameter '" + method + "." + key + "'");
  }
  for (const auto& method : options.methods) method_parameters(method);

  CorpusSplit split = split_corpus(dated, options.fractions, options.seed);
  ProtocolResult result;
  result.train_size = split.train.size();
  result.validation_size = split.validation.size();
  result.test_size = split.test.size();

  TrainingContext context(std::move(split.train));
  const double fallback = context.median_year();

  std::vector<Document> merged = split.validation;
  merged.insert(merged.end(), split.test.begin(), split.test.end());

  struct Tuned {
    std::string method;
    std::vector<DocResult> validation;
    std::vector<DocResult> test;
  };
  std::vector<Tuned> tuned;

  for (const auto& method : options.methods) {
    try {
      const auto grid_it = options.grids.find(method);
      const auto points = expand_grid(grid_it == options.grids.end() ? ParamGrid{} : grid_it->second);
      const bool merge = method == "knn" && options.merge_knn_validation;
      std::span<const Document> tuning = merge ? std::span<const Document>(merged) : split.validation;

      std::optional<Dater> best;
      std::vector<DocResult> best_results;
      double best_mae = 0.0;
      for (const auto& point : points) {
        Dater dater = make_dater(method, point, context);
        auto results = date_documents(dater, tuning, fallback, options.workers);
        const double mae = mae_of(results);
        result.grid_scores.push_back({method, format_params(point), mae});
        if (!best || mae < best_mae) {
          best = std::move(dater);
          best_results = std::move(results);
          best_mae = mae;
        }
      }

      const std::string params = format_params(best->params);
      if (merge) {
        result.reports.push_back(make_report(method, params, "val+test", best_results));
        std::vector<DocResult> val(best_results.begin(),
                                   best_results.begin() + static_cast<std::ptrdiff_t>(split.validation.size()));
        std::vector<DocResult> test(best_results.begin() + static_cast<std::ptrdiff_t>(split.validation.size()),
                                    best_results.end());
        tuned.push_back({method, std::move(val), std::move(test)});
      } else {
        auto test = date_documents(*best, split.test, fallback, options.workers);
        result.reports.push_back(make_report(method, params, "val", best_results));
        result.reports.push_back(make_report(method, params, "test", test));
        tuned.push_back({method, std::move(best_results), std::move(test)});
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception& e) {
      result.failures.push_back(method + ": " + e.what());
    }
  }

  if (options.blend && tuned.size() >= 2 && split.validation.size() > tuned.size()) {
    EstimateMatrix val(split.validation.size(), std::vector<double>(tuned.size()));
    EstimateMatrix test(split.test.size(), std::vector<double>(tuned.size()));
    std::vector<double> truths;
    for (const auto& doc : split.validation) truths.push_back(*doc.year);
    for (std::size_t j = 0; j < tuned.size(); ++j) {
      for (std::size_t i = 0; i < val.size(); ++i) val[i][j] = tuned[j].validation[i].estimate;
      for (std::size_t i = 0; i < test.size(); ++i) test[i][j] = tuned[j].test[i].estimate;
      result.blend_methods.push_back(tuned[j].method);
    }
    BlendWeights weights = fit_blend(val, truths);
    ParamMap shown;
    for (std::size_t j = 0; j < tuned.size(); ++j) shown[tuned[j].method] = format_number(weights.weights[j]);

    auto blended = [&](const EstimateMatrix& rows, std::span<const Document> docs, std::size_t which) {
      std::vector<DocResult> out;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        DocResult r;
        r.id = docs[i].id;
        r.truth = *docs[i].year;
        r.estimate = blend_predict(weights.weights, rows[i]);
        r.abs_error = std::abs(r.estimate - r.truth);
        for (const auto& t : tuned) r.fallback = r.fallback || (which == 0 ? t.validation : t.test)[i].fallback;
        out.push_back(std::move(r));
      }
      return out;
    };
    result.reports.push_back(make_report("blend", format_params(shown), "val", blended(val, split.validation, 0)));
    result.reports.push_back(make_report("blend", format_params(shown), "test", blended(test, split.test, 1)));
    result.blend = std::move(weights);
  }
  return result;
}

}  // namespace chartdate
