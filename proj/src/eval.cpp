#include "logitmat/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <memory>
#include <numeric>
#include <unordered_map>

#include "logitmat/error.hpp"
#include "logitmat/random.hpp"

namespace logitmat {

double mae(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size())
    throw Error(ErrorKind::kInvalidArgument, "mae: prediction/truth length mismatch");
  if (predictions.empty()) throw Error(ErrorKind::kInvalidArgument, "mae: empty input");
  double sum = 0.0;
  for (std::size_t k = 0; k < predictions.size(); ++k) sum += std::abs(predictions[k] - truths[k]);
  return sum / static_cast<double>(predictions.size());
}

Predictor logitmat_predictor(const FactorModel& model, PredictionRule rule) {
  auto shared = std::make_shared<const FactorModel>(model);
  return {[shared, rule](std::size_t u, std::size_t i) {
            return predict_rating(*shared, u, i, rule).value;
          },
          [shared, rule](std::size_t u, std::size_t i) {
            return predict_rating(*shared, u, i, rule).raw;
          }};
}

Predictor mf_predictor(const MfModel& model) {
  auto shared = std::make_shared<const MfModel>(model);
  return {[shared](std::size_t u, std::size_t i) { return shared->predict(u, i); },
          [shared](std::size_t u, std::size_t i) { return shared->raw(u, i); }};
}

Predictor baseline_predictor(BaselineKind kind, const RatingDataset& train, std::uint64_t seed) {
  auto baseline = std::make_shared<const Baseline>(kind, train);
  auto predict_rng = std::make_shared<Rng>(seed);
  // Ranking draws come from their own stream so MAE does not depend on
  // whether top-k lists were computed first.
  auto score_rng = std::make_shared<Rng>(seed ^ 0x9e3779b97f4a7c15ULL);
  return {[baseline, predict_rng](std::size_t u, std::size_t i) {
            return baseline->predict(u, i, *predict_rng);
          },
          [baseline, score_rng](std::size_t u, std::size_t i) {
            return baseline->predict(u, i, *score_rng);
          }};
}

TopKLists topk_lists(const std::function<double(std::size_t, std::size_t)>& score,
                     const SplitPair& split, std::size_t k) {
  if (k == 0) throw Error(ErrorKind::kInvalidArgument, "top-k size must be >= 1");
  const std::size_t n_items = split.train.n_items();
  std::vector<std::vector<std::uint32_t>> seen(split.train.n_users());
  for (const Rating& r : split.train.records()) seen[r.user].push_back(r.item);

  std::vector<std::uint32_t> users;
  for (const Rating& r : split.test.records()) users.push_back(r.user);
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());

  TopKLists lists;
  std::vector<char> excluded(n_items);
  std::vector<std::pair<double, std::uint32_t>> scored;
  scored.reserve(n_items);
  for (std::uint32_t u : users) {
    std::fill(excluded.begin(), excluded.end(), 0);
    if (u < seen.size()) {
      for (std::uint32_t i : seen[u]) excluded[i] = 1;
    }
    scored.clear();
    for (std::uint32_t i = 0; i < n_items; ++i) {
      if (!excluded[i]) scored.emplace_back(score(u, i), i);
    }
    const std::size_t take = std::min(k, scored.size());
    auto better = [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    };
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                      scored.end(), better);
    auto& list = lists[u];
    list.reserve(take);
    for (std::size_t r = 0; r < take; ++r) list.push_back(scored[r].second);
  }
  return lists;
}

ExposureProfile ExposureProfile::from_topk(const TopKLists& lists, std::size_t n_items) {
  ExposureProfile p{std::vector<std::uint64_t>(n_items, 0)};
  for (const auto& [user, items] : lists) {
    for (std::uint32_t i : items) ++p.counts.at(i);
  }
  return p;
}

ExposureProfile ExposureProfile::from_interactions(const RatingDataset& ds) {
  ExposureProfile p{std::vector<std::uint64_t>(ds.n_items(), 0)};
  for (const Rating& r : ds.records()) ++p.counts[r.item];
  return p;
}

double loglog_rank_slope(std::span<const std::uint64_t> counts) {
  std::vector<std::uint64_t> positive;
  for (std::uint64_t c : counts) {
    if (c > 0) positive.push_back(c);
  }
  if (positive.size() < 2)
    throw Error(ErrorKind::kInvalidArgument,
                "log-log slope needs at least two items with positive exposure");
  std::sort(positive.begin(), positive.end(), std::greater<>());

  const std::size_t n = positive.size();
  std::vector<double> x(n), y(n);
  for (std::size_t r = 0; r < n; ++r) {
    x[r] = std::log(static_cast<double>(r + 1));
    y[r] = std::log(static_cast<double>(positive[r]));
  }
  const double x_mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  // Responses are taken relative to the first one: the slope is unchanged and
  // a flat profile yields exactly zero.
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double dx = x[r] - x_mean;
    sxy += dx * (y[r] - y[0]);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double matthew_degree(const ExposureProfile& rec, const ExposureProfile& train) {
  return std::abs(loglog_rank_slope(rec.counts)) - std::abs(loglog_rank_slope(train.counts));
}

namespace {

struct FdPoint {
  FactorModel model;
  std::size_t user;
  std::size_t item;
  Branch branch;
  double rating;  // classic MF only
};

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
}

}  // namespace

double gradient_check(std::uint64_t seed, std::size_t trials, double eps, GradientTarget target,
                      const LogitGradientFn& gradient) {
  if (!(eps > 0.0 && eps <= 1e-3))
    throw Error(ErrorKind::kInvalidArgument, "finite-difference step must lie in (0, 1e-3]");
  if (trials < 1) throw Error(ErrorKind::kInvalidArgument, "gradient check needs >= 1 trial");
  constexpr std::size_t kUsers = 4, kItems = 5, kDim = 8;
  constexpr int kRMax = 5;
  const LogitGradientFn analytic_logit = gradient ? gradient : LogitGradientFn(grad_at);

  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    FdPoint p{FactorModel::zeros(kUsers, kItems, kDim, kDim, kRMax), 0, 0, Branch::kLogit, 0.0};
    for (Matrix* m : {&p.model.user_factors, &p.model.item_factors, &p.model.user_coeffs,
                      &p.model.item_coeffs}) {
      for (double& x : m->values()) x = rng.uniform(-1.0, 1.0);
    }
    p.user = rng.below(kUsers);
    p.item = rng.below(kItems);
    p.rating = rng.uniform(1.0, kRMax);
    switch (target) {
      case GradientTarget::kLogitBranch: p.branch = Branch::kLogit; break;
      case GradientTarget::kComplementBranch: p.branch = Branch::kComplement; break;
      default: p.branch = rng.below(2) == 0 ? Branch::kLogit : Branch::kComplement; break;
    }

    // Each block: the parameter row being perturbed and its analytic gradient.
    std::vector<std::pair<std::span<double>, std::vector<double>>> blocks;
    std::function<double()> loss;
    if (target == GradientTarget::kClassicMf) {
      auto mf = std::make_shared<MfModel>(
          MfModel{p.model.user_factors, p.model.item_factors, kRMax});
      MfGradient g = mf_grad_at(*mf, p.user, p.item, p.rating);
      blocks.emplace_back(mf->user_factors.row(p.user), std::move(g.user_factor));
      blocks.emplace_back(mf->item_factors.row(p.item), std::move(g.item_factor));
      loss = [mf, &p] { return mf_loss_at(*mf, p.user, p.item, p.rating); };
    } else {
      FactorGradient g = analytic_logit(p.model, p.user, p.item, p.branch);
      blocks.emplace_back(p.model.user_factors.row(p.user), std::move(g.user_factor));
      blocks.emplace_back(p.model.item_factors.row(p.item), std::move(g.item_factor));
      blocks.emplace_back(p.model.user_coeffs.row(p.user), std::move(g.user_coeff));
      blocks.emplace_back(p.model.item_coeffs.row(p.item), std::move(g.item_coeff));
      loss = [&p] { return loss_at(p.model, p.user, p.item, p.branch); };
    }

    for (auto& [row, analytic] : blocks) {
      for (std::size_t k = 0; k < row.size(); ++k) {
        const double saved = row[k];
        row[k] = saved + eps;
        const double up = loss();
        row[k] = saved - eps;
        const double down = loss();
        row[k] = saved;
        worst = std::max(worst, relative_error(analytic[k], (up - down) / (2.0 * eps)));
      }
    }
  }
  return worst;
}

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kClassicMf: return "classic-mf";
    case Algorithm::kGlobalMean: return "global-mean";
    case Algorithm::kLogitMat: return "logitmat";
    case Algorithm::kUniformRandom: return "uniform-random";
    case Algorithm::kUserMean: return "user-mean";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (Algorithm a : all_algorithms()) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

std::vector<Algorithm> all_algorithms() {
  return {Algorithm::kClassicMf, Algorithm::kGlobalMean, Algorithm::kLogitMat,
          Algorithm::kUniformRandom, Algorithm::kUserMean};
}

std::vector<double> predict_test(const Predictor& predictor, const RatingDataset& test) {
  std::vector<double> out;
  out.reserve(test.size());
  for (const Rating& r : test.records()) out.push_back(predictor.predict(r.user, r.item));
  return out;
}

std::vector<double> test_truths(const RatingDataset& test) {
  std::vector<double> out;
  out.reserve(test.size());
  for (const Rating& r : test.records()) out.push_back(r.value);
  return out;
}

namespace {

std::optional<double> degree_or_empty(const ExposureProfile& rec, const ExposureProfile& train) {
  auto positive = [](const ExposureProfile& p) {
    return std::count_if(p.counts.begin(), p.counts.end(), [](std::uint64_t c) { return c > 0; });
  };
  if (positive(rec) < 2 || positive(train) < 2) return std::nullopt;
  return matthew_degree(rec, train);
}

void check_compatible(const SplitPair& split) {
  if (split.train.scale_max() != split.test.scale_max())
    throw Error(ErrorKind::kInvalidScale, "train and test rating scales differ");
  if (split.train.n_users() != split.test.n_users() || split.train.n_items() != split.test.n_items())
    throw Error(ErrorKind::kShapeMismatch, "train and test do not share index maps");
  if (split.test.empty()) throw Error(ErrorKind::kEmptyDataset, "empty test set");
}

}  // namespace

ReportRow evaluate_predictor(const std::string& name, const Predictor& predictor,
                             const SplitPair& split, std::size_t top_k, std::uint64_t seed,
                             const std::string& config_fingerprint) {
  check_compatible(split);
  const double error = mae(predict_test(predictor, split.test), test_truths(split.test));
  const auto lists = topk_lists(predictor.score, split, top_k);
  const auto rec = ExposureProfile::from_topk(lists, split.train.n_items());
  const auto train = ExposureProfile::from_interactions(split.train);
  return {name, error, degree_or_empty(rec, train), seed, config_fingerprint};
}

ReportRow evaluate_external(const ExternalAlgorithm& external, const SplitPair& split,
                            std::uint64_t seed, const std::string& config_fingerprint) {
  check_compatible(split);
  std::unordered_map<std::string, double> by_pair;
  for (const auto& p : external.predictions) by_pair[p.user + '\x1f' + p.item] = p.prediction;

  std::vector<double> predictions;
  std::size_t missing = 0;
  for (const Rating& r : split.test.records()) {
    auto it = by_pair.find(split.test.users().external(r.user) + '\x1f' +
                           split.test.items().external(r.item));
    if (it == by_pair.end()) {
      ++missing;
    } else {
      predictions.push_back(it->second);
    }
  }
  if (missing > 0)
    throw Error(ErrorKind::kCoverage, external.name + ": " + std::to_string(missing) +
                                          " test pairs missing from the prediction file");
  const double error = mae(predictions, test_truths(split.test));

  std::optional<double> degree;
  if (external.topk) {
    ExposureProfile rec{std::vector<std::uint64_t>(split.train.n_items(), 0)};
    for (const auto& row : *external.topk) {
      auto item = split.train.items().find(row.item);
      if (!item)
        throw Error(ErrorKind::kCoverage, external.name + ": top-k item '" + row.item +
                                              "' is not in the catalog");
      ++rec.counts[*item];
    }
    degree = degree_or_empty(rec, ExposureProfile::from_interactions(split.train));
  }
  return {external.name, error, degree, seed, config_fingerprint};
}

EvalReport run_comparison(const SplitPair& split, const ComparisonOptions& options) {
  check_compatible(split);
  options.config.validate();
  if (split.train.scale_max() != options.config.r_max)
    throw Error(ErrorKind::kInvalidScale, "config r_max differs from the dataset scale");
  const std::string config_fp = fingerprint(options.config.canonical());
  const std::uint64_t seed = options.config.seed;

  auto run_one = [&](Algorithm algorithm) -> ReportRow {
    Predictor predictor;
    switch (algorithm) {
      case Algorithm::kLogitMat: {
        const auto positions = split.train.positions();
        predictor = logitmat_predictor(
            train_logitmat(split.train.n_users(), split.train.n_items(), options.config, positions)
                .model,
            options.rule);
        break;
      }
      case Algorithm::kClassicMf:
        predictor = mf_predictor(train_classic_mf(split.train, options.config));
        break;
      case Algorithm::kGlobalMean:
        predictor = baseline_predictor(BaselineKind::kGlobalMean, split.train, seed);
        break;
      case Algorithm::kUserMean:
        predictor = baseline_predictor(BaselineKind::kUserMean, split.train, seed);
        break;
      case Algorithm::kUniformRandom:
        predictor = baseline_predictor(BaselineKind::kUniformRandom, split.train, seed);
        break;
    }
    return evaluate_predictor(std::string(to_string(algorithm)), predictor, split, options.top_k,
                              seed, config_fp);
  };

  std::vector<Algorithm> algorithms = options.algorithms;
  std::sort(algorithms.begin(), algorithms.end());
  algorithms.erase(std::unique(algorithms.begin(), algorithms.end()), algorithms.end());

  EvalReport report{{}, options.dataset_id, split_fingerprint(split)};
  if (options.parallel) {
    std::vector<std::future<ReportRow>> pending;
    for (Algorithm a : algorithms) pending.push_back(std::async(std::launch::async, run_one, a));
    for (auto& f : pending) report.rows.push_back(f.get());
  } else {
    for (Algorithm a : algorithms) report.rows.push_back(run_one(a));
  }
  for (const auto& external : options.externals)
    report.rows.push_back(evaluate_external(external, split, seed, config_fp));

  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const ReportRow& a, const ReportRow& b) { return a.algorithm < b.algorithm; });
  return report;
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "algorithm,mae,matthew_degree,seed,config_fingerprint\n";
  for (const ReportRow& row : report.rows) {
    out << row.algorithm << ',' << format_double(row.mae) << ',';
    if (row.matthew_degree) out << format_double(*row.matthew_degree);
    out << ',' << row.seed << ',' << row.config_fingerprint << '\n';
  }
}

std::string fingerprint(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string split_fingerprint(const SplitPair& split) {
  std::string text;
  for (const RatingDataset* ds : {&split.train, &split.test}) {
    for (const Rating& r : ds->records()) {
      text += ds->users().external(r.user);
      text += ',';
      text += ds->items().external(r.item);
      text += ',';
      text += std::to_string(r.value);
      text += '\n';
    }
    text += "--\n";
  }
  return fingerprint(text);
}

}  // namespace logitmat
