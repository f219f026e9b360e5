#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "chartdate/corpus.hpp"
#include "chartdate/ensemble.hpp"
#include "chartdate/error.hpp"
#include "chartdate/eval.hpp"
#include "chartdate/parallel.hpp"
#include "chartdate/protocol.hpp"
#include "chartdate/synthetic.hpp"

namespace chartdate::cli {

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

// "key=value" -> (key, value)
std::pair<std::string, std::string> split_assignment(const std::string& text, const std::string& flag) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
    throw UsageError(flag + ": expected key=value, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::string safe_file_name(const std::string& id) {
  std::string out = id;
  for (char& c : out)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

std::vector<Document> dated_only(std::vector<Document> docs, std::ostream& err) {
  const auto before = docs.size();
  std::erase_if(docs, [](const Document& d) { return !d.year.has_value(); });
  if (docs.size() != before)
    err << "warning: skipped " << before - docs.size() << " undated training documents\n";
  return docs;
}

// ---------------------------------------------------------------------------
// preprocess

struct PreprocessArgs {
  std::string input;
  std::string output;
  std::string substitutions;
  bool strict = false;
};

int cmd_preprocess(const PreprocessArgs& args, std::ostream& err) {
  std::optional<SubstitutionTable> table;
  if (!args.substitutions.empty()) table = read_substitutions_file(args.substitutions);
  ReadOptions options;
  options.strict = args.strict;
  CorpusReadResult read = read_corpus_file(args.input, options);
  for (const auto& issue : read.issues) err << args.input << ":" << issue.line << ": " << issue.message << "\n";

  std::vector<Document> docs = std::move(read.tokenized);
  for (const auto& raw : read.documents) {
    try {
      docs.push_back(preprocess(raw, table ? &*table : nullptr));
    } catch (const DataError& e) {
      if (args.strict) throw DataError(raw.id + ": " + e.what());
      err << raw.id << ": " << e.what() << "\n";
    }
  }
  if (docs.empty()) err << "warning: no documents in '" << args.input << "'\n";
  for (const auto& doc : docs) err << doc.id << "\t" << doc.tokens.size() << " tokens\n";

  auto out = open_output(args.output);
  write_documents_jsonl(out, docs);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// date

struct DateArgs {
  std::string corpus;
  std::string targets;
  std::string method;
  std::vector<std::string> params;
  std::string blend_methods = "knn,mp,qr,mt";
  std::string emit_curves;
  std::string output;
  std::uint64_t seed = 1;
  bool strict = false;
  std::size_t workers = 0;
};

struct DateRow {
  std::string id;
  std::optional<DateEstimate> estimate;
  std::string error;
};

void write_curve(const std::string& dir, const std::string& id, const Curve& curve) {
  auto out = open_output((std::filesystem::path(dir) / (safe_file_name(id) + ".csv")).string());
  out << "year,value\n";
  for (const auto& p : curve) out << p.year << ',' << format_number(p.value) << '\n';
}

std::vector<DateRow> date_rows(const std::vector<Document>& targets, std::size_t workers,
                               const std::function<DateEstimate(const Document&)>& date) {
  std::vector<DateRow> rows(targets.size());
  parallel_for(
      targets.size(),
      [&](std::size_t i) {
        rows[i].id = targets[i].id;
        try {
          rows[i].estimate = date(targets[i]);
        } catch (const DataError& e) {
          rows[i].error = e.what();
        } catch (const NumericalError& e) {
          rows[i].error = e.what();
        }
      },
      workers);
  return rows;
}

// Blend: split the training corpus, fit weights on the held-out part with
// every method trained on the rest, then date the targets with those models.
std::vector<DateRow> date_blend(std::vector<Document> train, const std::vector<Document>& targets,
                                const DateArgs& args, std::ostream& err) {
  const auto methods = split_list(args.blend_methods, ',');
  if (methods.size() < 2) throw UsageError("--blend-methods: need at least two methods");
  std::map<std::string, ParamMap> params;
  for (const auto& m : methods) {
    if (std::find(method_names().begin(), method_names().end(), m) == method_names().end())
      throw UsageError("--blend-methods: unknown method '" + m + "'");
    params[m];
  }
  for (const auto& p : args.params) {
    auto [key, value] = split_assignment(p, "--param");
    const auto dot = key.find('.');
    if (dot == std::string::npos || !params.count(key.substr(0, dot)))
      throw UsageError("--param: blend parameters take the form method.key=value, got '" + p + "'");
    params[key.substr(0, dot)][key.substr(dot + 1)] = value;
  }

  const double held = 0.15;
  CorpusSplit split = split_corpus(train, {1.0 - 2 * held, held, held}, args.seed);
  std::vector<Document> holdout = std::move(split.validation);
  holdout.insert(holdout.end(), split.test.begin(), split.test.end());
  TrainingContext context(std::move(split.train));

  std::vector<Dater> daters;
  for (const auto& m : methods) daters.push_back(make_dater(m, params[m], context));
  EstimateMatrix fit_rows(holdout.size(), std::vector<double>(methods.size()));
  std::vector<double> truths;
  for (const auto& d : holdout) truths.push_back(*d.year);
  for (std::size_t j = 0; j < daters.size(); ++j) {
    auto results = date_documents(daters[j], holdout, context.median_year(), args.workers);
    for (std::size_t i = 0; i < results.size(); ++i) fit_rows[i][j] = results[i].estimate;
  }
  const BlendWeights weights = fit_blend(fit_rows, truths);
  err << "blend weights:";
  for (std::size_t j = 0; j < methods.size(); ++j) err << ' ' << methods[j] << '=' << format_number(weights.weights[j]);
  err << (weights.singular ? " (singular, equal weights)" : "") << "\n";

  return date_rows(targets, args.workers, [&](const Document& doc) {
    std::vector<double> row;
    DateEstimate est;
    est.method = "blend";
    for (const auto& dater : daters) {
      try {
        row.push_back(dater.date(doc).year_hat);
      } catch (const DataError&) {
        row.push_back(context.median_year());
        est.add_flag("fallback_" + dater.method);
      } catch (const NumericalError&) {
        row.push_back(context.median_year());
        est.add_flag("fallback_" + dater.method);
      }
    }
    est.year_hat = blend_predict(weights.weights, row);
    return est;
  });
}

int cmd_date(const DateArgs& args, std::ostream& out, std::ostream& err) {
  if (args.method != "blend" &&
      std::find(method_names().begin(), method_names().end(), args.method) == method_names().end())
    throw UsageError("--method: unknown method '" + args.method + "'");
  std::vector<Document> train = dated_only(load_documents(args.corpus), err);
  std::vector<Document> targets = load_documents(args.targets);

  std::vector<DateRow> rows;
  if (args.method == "blend") {
    rows = date_blend(std::move(train), targets, args, err);
  } else {
    ParamMap params;
    for (const auto& p : args.params) {
      auto [key, value] = split_assignment(p, "--param");
      params[key] = value;
    }
    TrainingContext context(std::move(train));
    Dater dater = make_dater(args.method, params, context);
    rows = date_rows(targets, args.workers, dater.date);
  }

  if (!args.emit_curves.empty()) std::filesystem::create_directories(args.emit_curves);
  std::ofstream file;
  if (!args.output.empty()) file = open_output(args.output);
  std::ostream& sink = args.output.empty() ? out : file;
  sink << "id\tyear_hat\tstderr\tflags\n";
  std::size_t failed = 0;
  for (const auto& row : rows) {
    if (!row.estimate) {
      ++failed;
      err << row.id << ": " << row.error << "\n";
      sink << row.id << "\tNA\tNA\tundatable\n";
      continue;
    }
    const DateEstimate& e = *row.estimate;
    std::string flags;
    for (const auto& f : e.flags) flags += (flags.empty() ? "" : ",") + f;
    sink << row.id << '\t' << format_number(e.year_hat) << '\t'
         << (e.std_error ? format_number(*e.std_error) : "NA") << '\t' << (flags.empty() ? "-" : flags) << '\n';
    if (!args.emit_curves.empty() && !e.curve.empty()) write_curve(args.emit_curves, row.id, e.curve);
  }
  if (failed > 0 && args.strict) throw DataError(std::to_string(failed) + " documents could not be dated");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string corpus;
  std::string methods = "knn,mp,qr,mt";
  std::vector<std::string> grids;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  bool merge_knn = false;
  bool no_blend = false;
  std::size_t workers = 0;
};

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out, std::ostream& err) {
  ProtocolOptions options;
  options.methods = split_list(args.methods, ',');
  for (const auto& m : options.methods)
    if (std::find(method_names().begin(), method_names().end(), m) == method_names().end())
      throw UsageError("--methods: unknown method '" + m + "'");
  for (const auto& g : args.grids) {
    auto [key, values] = split_assignment(g, "--grid");
    const auto dot = key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == key.size())
      throw UsageError("--grid: expected method.param=v1,v2, got '" + g + "'");
    const std::string method = key.substr(0, dot);
    const std::string param = key.substr(dot + 1);
    if (std::find(options.methods.begin(), options.methods.end(), method) == options.methods.end())
      throw UsageError("--grid: method '" + method + "' is not among --methods");
    const auto& known = method_parameters(method);
    if (std::find(known.begin(), known.end(), param) == known.end())
      throw UsageError("--grid: unknown parameter '" + key + "'");
    auto list = split_list(values, ',');
    if (std::any_of(list.begin(), list.end(), [](const std::string& v) { return v.empty(); }))
      throw UsageError("--grid: empty value in '" + g + "'");
    options.grids[method][param] = std::move(list);
  }
  options.seed = args.seed;
  options.merge_knn_validation = args.merge_knn;
  options.blend = !args.no_blend;
  options.workers = args.workers;

  const std::vector<Document> corpus = load_documents(args.corpus);
  ProtocolResult result;
  try {
    result = run_protocol(corpus, options);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--grid: ") + e.what());
  }
  for (const auto& f : result.failures) err << "method failed: " << f << "\n";

  std::filesystem::create_directories(args.out_dir);
  const std::filesystem::path dir(args.out_dir);
  {
    auto f = open_output((dir / "summary.tsv").string());
    write_summary_tsv(f, result.reports);
  }
  {
    auto f = open_output((dir / "per_doc.tsv").string());
    write_per_doc_tsv(f, result.reports);
  }
  {
    auto f = open_output((dir / "grid.tsv").string());
    f << "method\tparams\tvalidation_mae\n";
    for (const auto& g : result.grid_scores)
      f << g.method << '\t' << (g.params.empty() ? "-" : g.params) << '\t' << format_number(g.validation_mae) << '\n';
  }
  {
    auto f = open_output((dir / "table.txt").string());
    write_table(f, result.reports);
  }
  err << "split: train " << result.train_size << ", validation " << result.validation_size << ", test "
      << result.test_size << "\n";
  write_table(out, result.reports);
  return result.reports.empty() ? kExitData : kExitOk;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string model;
  std::string kind;
  std::size_t n = 0;
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_synth(const SynthArgs& args) {
  SyntheticSpec spec;
  if (!args.model.empty()) spec = read_synthetic_spec_file(args.model);
  if (!args.kind.empty()) spec.kind = args.kind;
  SyntheticModel model;
  try {
    model = make_model(spec);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model: ") + e.what());
  }
  const auto docs = generate_corpus(model, args.n, args.seed);
  auto out = open_output(args.output);
  write_documents_jsonl(out, docs);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Date undated documents from their vocabulary", "chartdate"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value file of option defaults; flags override it");
  app.fallthrough();
  std::size_t workers = default_worker_count();
  app.add_option("--workers", workers, "Worker threads (default: CHARTDATE_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);

  PreprocessArgs pre;
  auto* pre_cmd = app.add_subcommand("preprocess", "Tokenize a JSON Lines corpus");
  pre_cmd->add_option("input", pre.input, "Raw corpus (.jsonl)")->required();
  pre_cmd->add_option("output", pre.output, "Tokenized corpus (.jsonl)")->required();
  pre_cmd->add_option("--substitutions", pre.substitutions, "Two-column TSV of whole-token replacements");
  pre_cmd->add_flag("--strict", pre.strict, "Abort on the first malformed line");

  DateArgs date;
  auto* date_cmd = app.add_subcommand("date", "Date target documents against a dated training corpus");
  date_cmd->add_option("--corpus", date.corpus, "Dated training corpus (.jsonl)")->required();
  date_cmd->add_option("--targets", date.targets, "Documents to date (.jsonl)")->required();
  date_cmd->add_option("--method", date.method, "knn, mp, qr, mt or blend")->required();
  date_cmd->add_option("--param", date.params, "Method parameter key=value (method.key=value for blend)");
  date_cmd->add_option("--blend-methods", date.blend_methods, "Comma-separated methods combined by blend");
  date_cmd->add_option("--emit-curves", date.emit_curves, "Directory for per-target (year, value) CSVs");
  date_cmd->add_option("--out", date.output, "Output TSV (default: stdout)");
  date_cmd->add_option("--seed", date.seed, "Seed of the blend's held-out split");
  date_cmd->add_flag("--strict", date.strict, "Exit nonzero when any target cannot be dated");

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Tune and evaluate methods on a random split");
  eval_cmd->add_option("--corpus", eval.corpus, "Dated corpus (.jsonl)")->required();
  eval_cmd->add_option("--methods", eval.methods, "Comma-separated methods");
  eval_cmd->add_option("--grid", eval.grids, "Grid values method.param=v1,v2,...");
  eval_cmd->add_option("--seed", eval.seed, "Split seed");
  eval_cmd->add_option("--out-dir", eval.out_dir, "Directory for report files");
  eval_cmd->add_flag("--merge-knn", eval.merge_knn, "Report kNN on validation and test combined");
  eval_cmd->add_flag("--no-blend", eval.no_blend, "Skip the blended estimator");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Sample a corpus from a synthetic generative model");
  synth_cmd->add_option("--model", synth.model, "Model file (key = value)");
  synth_cmd->add_option("--kind", synth.kind, "smooth, two_regime or deeds (overrides the model file)");
  synth_cmd->add_option("--n", synth.n, "Number of documents")->required();
  synth_cmd->add_option("--seed", synth.seed, "Sampling seed");
  synth_cmd->add_option("--out", synth.output, "Output corpus (.jsonl)")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  date.workers = workers;
  eval.workers = workers;
  try {
    if (*pre_cmd) return cmd_preprocess(pre, err);
    if (*date_cmd) return cmd_date(date, out, err);
    if (*eval_cmd) return cmd_evaluate(eval, out, err);
    if (*synth_cmd) return cmd_synth(synth);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace chartdate::cli
