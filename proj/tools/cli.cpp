#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

#include "logitmat/baselines.hpp"
#include "logitmat/data.hpp"
#include "logitmat/error.hpp"
#include "logitmat/eval.hpp"
#include "logitmat/model_io.hpp"
#include "logitmat/random.hpp"
#include "logitmat/trainer.hpp"
#include "sweep.hpp"

namespace logitmat::lab {

namespace fs = std::filesystem;

namespace {

// Sub-streams of --seed.
constexpr std::uint64_t kSynthStream = 1;
constexpr std::uint64_t kSubsampleStream = 2;
constexpr std::uint64_t kSplitStream = 3;

constexpr double kGradientTolerance = 1e-5;

struct DataOptions {
  std::string dataset = "interchange-csv";
  std::string input;
  std::string train_file;
  std::string test_file;
  std::string data_dir;
  LdosColumns columns;
  int scale_max = 5;
  std::size_t users = 500;
  std::size_t items = 300;
  int levels = 5;
  double density = 0.05;
  double test_fraction = 0.2;
  double subsample = 1.0;
};

struct TrainOptions {
  TrainConfig config;
  std::string pair_mode = "observed-positions";
  bool linear_decay = false;
  std::string rule = "inner-product";

  TrainConfig resolved() const {
    TrainConfig c = config;
    c.pair_mode = pair_mode == "uniform-random" ? PairMode::kUniformGrid : PairMode::kObservedPositions;
    c.decay = linear_decay ? LearningRateDecay::kLinear : LearningRateDecay::kNone;
    return c;
  }
  PredictionRule prediction_rule() const {
    return rule == "scaled-sigmoid" ? PredictionRule::kScaledSigmoid : PredictionRule::kInnerProduct;
  }
};

void add_seed_option(CLI::App* cmd, std::uint64_t& seed) {
  cmd->add_option("--seed", seed, "Master seed; every random draw derives from it")
      ->capture_default_str();
}

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--dataset", d.dataset, "Input kind")
      ->check(CLI::IsMember({"movielens", "ldos", "synthetic", "interchange-csv"}))
      ->capture_default_str();
  cmd->add_option("--input", d.input, "Ratings file (relative paths resolve under --data-dir)");
  cmd->add_option("--train-file", d.train_file, "Pre-split interchange CSV (train part)");
  cmd->add_option("--test-file", d.test_file, "Pre-split interchange CSV (test part)");
  cmd->add_option("--data-dir", d.data_dir, "Base directory for relative input paths")
      ->envname("LOGITMAT_DATA_DIR");
  cmd->add_option("--user-col", d.columns.user, "LDOS user column")->capture_default_str();
  cmd->add_option("--item-col", d.columns.item, "LDOS item column")->capture_default_str();
  cmd->add_option("--rating-col", d.columns.rating, "LDOS rating column")->capture_default_str();
  cmd->add_option("--scale-max", d.scale_max, "Rating scale maximum of interchange CSV input")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--users", d.users, "Synthetic grid users")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--items", d.items, "Synthetic grid items")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--levels", d.levels, "Synthetic rating levels")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--density", d.density, "Synthetic fraction of observed cells")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--test-fraction", d.test_fraction, "Holdout fraction")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--subsample", d.subsample, "Record-level subsample fraction before splitting")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
}

void add_train_options(CLI::App* cmd, TrainOptions& t) {
  TrainConfig& c = t.config;
  cmd->add_option("--latent-dim", c.latent_dim, "Latent dimension d")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--coeff-dim", c.coeff_dim, "Coefficient dimension d_w")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--learning-rate", c.learning_rate, "SGD step size")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--steps", c.steps, "LogitMat SGD steps")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--epochs", c.epochs, "Classic MF epochs")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--init-scale", c.init_scale, "Initial entries uniform in [-s, s]")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--r-max", c.r_max, "Maximum rating (= rating levels)")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--pair-mode", t.pair_mode, "LogitMat pair sampling")
      ->check(CLI::IsMember({"observed-positions", "uniform-random"}))
      ->capture_default_str();
  cmd->add_flag("--linear-decay", t.linear_decay, "Linearly decay the learning rate to 0");
  cmd->add_option("--rule", t.rule, "LogitMat prediction rule")
      ->check(CLI::IsMember({"inner-product", "scaled-sigmoid"}))
      ->capture_default_str();
}

fs::path resolve(const DataOptions& d, const std::string& path) {
  fs::path p(path);
  if (p.is_relative() && !d.data_dir.empty()) return fs::path(d.data_dir) / p;
  return p;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  return out;
}

RatingDataset load_dataset(const DataOptions& d, std::uint64_t seed) {
  if (d.dataset == "synthetic")
    return generate_zipf_synthetic(d.users, d.items, d.levels, d.density,
                                   derive_seed(seed, kSynthStream));
  if (d.input.empty())
    throw Error(ErrorKind::kInvalidArgument, "--input is required for dataset " + d.dataset);
  auto in = open_input(resolve(d, d.input));
  if (d.dataset == "movielens") return parse_movielens(in);
  if (d.dataset == "ldos") return parse_ldos(in, d.columns);
  return parse_interchange_csv(in, d.scale_max);
}

RatingDataset maybe_subsample(const DataOptions& d, RatingDataset ds, std::uint64_t seed) {
  if (d.subsample >= 1.0) return ds;
  return subsample(ds, d.subsample, derive_seed(seed, kSubsampleStream));
}

SplitPair load_split_pair(const DataOptions& d, std::uint64_t seed) {
  if (!d.train_file.empty() || !d.test_file.empty()) {
    if (d.train_file.empty() || d.test_file.empty())
      throw Error(ErrorKind::kInvalidArgument, "--train-file and --test-file go together");
    auto train = open_input(resolve(d, d.train_file));
    auto test = open_input(resolve(d, d.test_file));
    return load_split(train, test, d.scale_max);
  }
  return split_holdout(maybe_subsample(d, load_dataset(d, seed), seed), d.test_fraction,
                       derive_seed(seed, kSplitStream));
}

std::string dataset_id(const DataOptions& d) {
  if (!d.train_file.empty()) return d.train_file + "+" + d.test_file;
  if (d.dataset == "synthetic")
    return "synthetic:" + std::to_string(d.users) + "x" + std::to_string(d.items);
  return d.dataset + ":" + d.input;
}

std::vector<Algorithm> parse_algorithms(const std::vector<std::string>& names) {
  if (names.empty()) return all_algorithms();
  std::vector<Algorithm> out;
  for (const auto& n : names) {
    auto a = parse_algorithm(n);
    if (!a) throw Error(ErrorKind::kInvalidArgument, "unknown algorithm '" + n + "'");
    out.push_back(*a);
  }
  return out;
}

// name=path pairs from repeated flags.
std::map<std::string, std::string> parse_named_paths(const std::vector<std::string>& specs,
                                                     const char* flag) {
  std::map<std::string, std::string> out;
  for (const auto& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
      throw Error(ErrorKind::kInvalidArgument, std::string(flag) + " expects name=path, got '" + s + "'");
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

void emit(const std::string& path, std::ostream& fallback,
          const std::function<void(std::ostream&)>& write) {
  if (path.empty() || path == "-") {
    write(fallback);
    return;
  }
  auto out = open_output(path);
  write(out);
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path);
}

// Flat key=value lines; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  auto in = open_input(path);
  std::map<std::string, std::string> values;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error::at_line(ErrorKind::kMalformedLine, line_no, "config lines are key=value");
    values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return values;
}

// Splices config-file settings into argv for the selected subcommand, behind
// any flag given explicitly, so precedence is flags > config file > defaults.
std::vector<std::string> apply_config(CLI::App& app, std::vector<std::string> args) {
  std::optional<std::string> config_path;
  std::vector<std::string> kept;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) {
      config_path = args[++k];
    } else if (args[k].rfind("--config=", 0) == 0) {
      config_path = args[k].substr(9);
    } else {
      kept.push_back(args[k]);
    }
  }
  if (!config_path) return kept;

  auto first_positional = std::find_if(kept.begin(), kept.end(),
                                       [](const std::string& a) { return a.rfind('-', 0) != 0; });
  if (first_positional == kept.end()) return kept;
  CLI::App* sub = app.get_subcommand_no_throw(*first_positional);
  if (sub == nullptr) return kept;

  for (const auto& [key, value] : read_config_file(*config_path)) {
    const std::string flag = "--" + key;
    if (sub->get_option_no_throw(flag) == nullptr) continue;
    const bool given = std::any_of(kept.begin(), kept.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (!given) kept.push_back(flag + "=" + value);
  }
  return kept;
}

double mean_tail_loss(const TrainHistory& h, bool tail) {
  const std::size_t n = h.sampled_loss.size();
  const std::size_t take = std::max<std::size_t>(1, n / 10);
  double sum = 0.0;
  for (std::size_t k = 0; k < take; ++k) sum += h.sampled_loss[tail ? n - 1 - k : k].loss;
  return sum / static_cast<double>(take);
}

}  // namespace

int dispatch(std::span<const std::string> argv, std::ostream& out, std::ostream& err) {
  CLI::App app{
      "logitmat-lab: zero-shot LogitMat training and evaluation.\n"
      "Any subcommand accepts --config FILE with flat key=value lines naming its long flags."};
  app.name("logitmat-lab");
  app.require_subcommand(1);

  DataOptions data;
  TrainOptions train;
  std::uint64_t seed = 1;

  auto* ingest = app.add_subcommand("ingest", "Convert a ratings file to interchange CSV");
  std::string ingest_out, ingest_train_out, ingest_test_out;
  add_data_options(ingest, data);
  add_seed_option(ingest, seed);
  ingest->add_option("--output", ingest_out, "Interchange CSV of the whole dataset")->required();
  ingest->add_option("--train-out", ingest_train_out, "Also write the train split here");
  ingest->add_option("--test-out", ingest_test_out, "Also write the test split here");

  auto* synth = app.add_subcommand("synth", "Generate a Zipf-distributed synthetic dataset");
  std::string synth_out;
  synth->add_option("--users", data.users, "Users")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--items", data.items, "Items")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--levels", data.levels, "Rating levels k")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--density", data.density, "Fraction of observed cells")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  add_seed_option(synth, seed);
  synth->add_option("--output", synth_out, "Interchange CSV")->required();

  auto* train_cmd = app.add_subcommand("train", "Train LogitMat or classic MF on the train split");
  std::string algorithm = "logitmat", model_out, csv_out, history_out;
  add_data_options(train_cmd, data);
  add_train_options(train_cmd, train);
  add_seed_option(train_cmd, seed);
  train_cmd->add_option("--algorithm", algorithm, "Model to train")
      ->check(CLI::IsMember({"logitmat", "classic-mf"}))
      ->capture_default_str();
  train_cmd->add_option("--output", model_out, "Model file")->required();
  train_cmd->add_option("--export-csv", csv_out, "Also dump the matrices as CSV");
  train_cmd->add_option("--history-out", history_out, "Sampled loss history CSV (LogitMat)");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved model on the test split");
  std::string model_in, report_out, predictions_out;
  std::size_t top_k = 10;
  add_data_options(eval_cmd, data);
  add_seed_option(eval_cmd, seed);
  eval_cmd->add_option("--model", model_in, "Model file")->required();
  eval_cmd->add_option("--rule", train.rule, "LogitMat prediction rule")
      ->check(CLI::IsMember({"inner-product", "scaled-sigmoid"}))
      ->capture_default_str();
  eval_cmd->add_option("--top-k", top_k, "Recommendation list length")->check(CLI::PositiveNumber)->capture_default_str();
  eval_cmd->add_option("--output", report_out, "Report CSV (stdout if omitted)");
  eval_cmd->add_option("--predictions-out", predictions_out, "user,item,prediction for the test split");

  auto* compare = app.add_subcommand("compare", "Train and compare algorithms on one split");
  std::vector<std::string> algorithm_names, externals, external_topks;
  add_data_options(compare, data);
  add_train_options(compare, train);
  add_seed_option(compare, seed);
  compare->add_option("--algorithms", algorithm_names,
                      "Subset of classic-mf,global-mean,logitmat,uniform-random,user-mean")
      ->delimiter(',');
  compare->add_option("--external", externals, "name=predictions.csv (repeatable)");
  compare->add_option("--external-topk", external_topks, "name=topk.csv for an --external entry");
  compare->add_option("--top-k", top_k, "Recommendation list length")->check(CLI::PositiveNumber)->capture_default_str();
  compare->add_option("--output", report_out, "Report CSV (stdout if omitted)");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of analytic gradients");
  std::size_t trials = 100;
  double eps = 1e-6;
  std::string gradcheck_out;
  gradcheck->add_option("--trials", trials, "Random points per target")->check(CLI::PositiveNumber)->capture_default_str();
  gradcheck->add_option("--eps", eps, "Central-difference step")->check(CLI::Range(0.0, 1e-3))->capture_default_str();
  add_seed_option(gradcheck, seed);
  gradcheck->add_option("--output", gradcheck_out, "target,max_relative_error CSV");

  auto* sweep = app.add_subcommand("sweep", "Learning-rate sweep over all algorithms");
  std::vector<double> rates;
  std::size_t repeats = 1;
  std::string sweep_out, svg_out, detail_out;
  add_data_options(sweep, data);
  add_train_options(sweep, train);
  add_seed_option(sweep, seed);
  sweep->add_option("--rates", rates, "Strictly increasing learning rates")->delimiter(',')->required();
  sweep->add_option("--repeats", repeats, "Seeds per rate (seed, seed+1, ...), averaged")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep->add_option("--algorithms", algorithm_names, "Algorithm subset")->delimiter(',');
  sweep->add_option("--top-k", top_k, "Recommendation list length")->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_option("--output", sweep_out, "Sweep CSV (stdout if omitted)");
  sweep->add_option("--svg", svg_out, "Line chart of MAE against learning rate");
  sweep->add_option("--detail-output", detail_out, "Per-seed rows for variance analysis");

  try {
    std::vector<std::string> args = apply_config(app, {argv.begin(), argv.end()});
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "Run 'logitmat-lab --help' for usage.\n";
    return 2;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return 2;
  }

  try {
    train.config.seed = seed;

    if (*ingest) {
      const RatingDataset ds = maybe_subsample(data, load_dataset(data, seed), seed);
      emit(ingest_out, out, [&](std::ostream& o) { write_interchange_csv(o, ds); });
      if (!ingest_train_out.empty() || !ingest_test_out.empty()) {
        const SplitPair split = split_holdout(ds, data.test_fraction, derive_seed(seed, kSplitStream));
        if (!ingest_train_out.empty())
          emit(ingest_train_out, out, [&](std::ostream& o) { write_interchange_csv(o, split.train); });
        if (!ingest_test_out.empty())
          emit(ingest_test_out, out, [&](std::ostream& o) { write_interchange_csv(o, split.test); });
      }
      out << "ingested " << ds.size() << " records, " << ds.n_users() << " users, "
          << ds.n_items() << " items\n";
      return 0;
    }

    if (*synth) {
      const RatingDataset ds = generate_zipf_synthetic(data.users, data.items, data.levels,
                                                       data.density, derive_seed(seed, kSynthStream));
      emit(synth_out, out, [&](std::ostream& o) { write_interchange_csv(o, ds); });
      out << "generated " << ds.size() << " records\n";
      return 0;
    }

    if (*train_cmd) {
      const SplitPair split = load_split_pair(data, seed);
      TrainConfig config = train.resolved();
      config.r_max = split.train.scale_max();
      AnyModel model;
      if (algorithm == "logitmat") {
        const auto positions = split.train.positions();
        TrainResult result =
            train_logitmat(split.train.n_users(), split.train.n_items(), config, positions);
        if (!history_out.empty()) {
          emit(history_out, out, [&](std::ostream& o) {
            o << "step,branch,loss\n";
            for (const auto& s : result.history.sampled_loss)
              o << s.step << ',' << static_cast<int>(s.branch) << ',' << format_double(s.loss) << '\n';
          });
        }
        out << "trained logitmat: " << config.steps << " steps, sampled loss "
            << mean_tail_loss(result.history, false) << " -> "
            << mean_tail_loss(result.history, true) << ", "
            << std::chrono::duration<double>(result.history.wall_time).count() << " s\n";
        model = std::move(result.model);
      } else {
        MfModel mf = train_classic_mf(split.train, config);
        out << "trained classic-mf: " << config.epochs << " epochs, train MSE "
            << mf_mean_squared_error(mf, split.train) << '\n';
        model = std::move(mf);
      }
      persist_model(model, model_out);
      if (!csv_out.empty()) emit(csv_out, out, [&](std::ostream& o) { export_model_csv(o, model); });
      return 0;
    }

    if (*eval_cmd) {
      const SplitPair split = load_split_pair(data, seed);
      const AnyModel model = load_model(model_in);
      std::string name;
      Predictor predictor;
      std::size_t n_users = 0, n_items = 0;
      if (const auto* m = std::get_if<FactorModel>(&model)) {
        name = "logitmat";
        predictor = logitmat_predictor(*m, train.prediction_rule());
        n_users = m->n_users();
        n_items = m->n_items();
      } else {
        const auto& mf = std::get<MfModel>(model);
        name = "classic-mf";
        predictor = mf_predictor(mf);
        n_users = mf.n_users();
        n_items = mf.n_items();
      }
      if (n_users != split.train.n_users() || n_items != split.train.n_items())
        throw Error(ErrorKind::kShapeMismatch,
                    "model is " + std::to_string(n_users) + "x" + std::to_string(n_items) +
                        " but the dataset has " + std::to_string(split.train.n_users()) + "x" +
                        std::to_string(split.train.n_items()));
      std::ostringstream model_bytes;
      write_model(model_bytes, model);
      EvalReport report{{evaluate_predictor(name, predictor, split, top_k, seed,
                                            fingerprint(model_bytes.str()))},
                        dataset_id(data), split_fingerprint(split)};
      if (!predictions_out.empty()) {
        std::vector<ExternalPrediction> rows;
        const auto values = predict_test(predictor, split.test);
        for (std::size_t k = 0; k < values.size(); ++k) {
          const Rating& r = split.test.records()[k];
          rows.push_back({split.test.users().external(r.user), split.test.items().external(r.item),
                          values[k]});
        }
        emit(predictions_out, out, [&](std::ostream& o) { write_prediction_file(o, rows); });
      }
      emit(report_out, out, [&](std::ostream& o) { write_report_csv(o, report); });
      return 0;
    }

    if (*compare) {
      const SplitPair split = load_split_pair(data, seed);
      ComparisonOptions options;
      options.algorithms = parse_algorithms(algorithm_names);
      options.config = train.resolved();
      options.config.r_max = split.train.scale_max();
      options.top_k = top_k;
      options.rule = train.prediction_rule();
      options.dataset_id = dataset_id(data);
      const auto topk_paths = parse_named_paths(external_topks, "--external-topk");
      for (const auto& [name, path] : parse_named_paths(externals, "--external")) {
        auto in = open_input(resolve(data, path));
        ExternalAlgorithm ext{name, parse_prediction_file(in), std::nullopt};
        if (auto it = topk_paths.find(name); it != topk_paths.end()) {
          auto topk_in = open_input(resolve(data, it->second));
          ext.topk = parse_topk_file(topk_in);
        }
        options.externals.push_back(std::move(ext));
      }
      for (const auto& [name, path] : topk_paths) {
        if (std::none_of(options.externals.begin(), options.externals.end(),
                         [&](const ExternalAlgorithm& e) { return e.name == name; }))
          throw Error(ErrorKind::kInvalidArgument, "--external-topk " + name + " has no --external");
      }
      const EvalReport report = run_comparison(split, options);
      emit(report_out, out, [&](std::ostream& o) { write_report_csv(o, report); });
      return 0;
    }

    if (*gradcheck) {
      const std::vector<std::pair<std::string, GradientTarget>> targets{
          {"logitmat-logit-branch", GradientTarget::kLogitBranch},
          {"logitmat-complement-branch", GradientTarget::kComplementBranch},
          {"classic-mf", GradientTarget::kClassicMf}};
      double worst = 0.0;
      std::ostringstream csv;
      csv << "target,max_relative_error\n";
      for (std::size_t t = 0; t < targets.size(); ++t) {
        const double e = gradient_check(derive_seed(seed, t), trials, eps, targets[t].second);
        worst = std::max(worst, e);
        out << targets[t].first << " max relative error " << format_double(e) << '\n';
        csv << targets[t].first << ',' << format_double(e) << '\n';
      }
      out << "max relative error " << format_double(worst) << " ("
          << (worst < kGradientTolerance ? "ok" : "FAILED") << ", tolerance "
          << format_double(kGradientTolerance) << ")\n";
      if (!gradcheck_out.empty()) emit(gradcheck_out, out, [&](std::ostream& o) { o << csv.str(); });
      return worst < kGradientTolerance ? 0 : 1;
    }

    if (*sweep) {
      const SplitPair split = load_split_pair(data, seed);
      ComparisonOptions options;
      options.algorithms = parse_algorithms(algorithm_names);
      options.config = train.resolved();
      options.config.r_max = split.train.scale_max();
      options.top_k = top_k;
      options.rule = train.prediction_rule();
      options.dataset_id = dataset_id(data);
      const SweepResult result = run_sweep(split, options, rates, repeats);
      emit(sweep_out, out, [&](std::ostream& o) { write_sweep_csv(o, result); });
      if (!svg_out.empty()) emit(svg_out, out, [&](std::ostream& o) { write_sweep_svg(o, result); });
      if (!detail_out.empty())
        emit(detail_out, out, [&](std::ostream& o) { write_sweep_detail_csv(o, result); });
      return 0;
    }
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace logitmat::lab
