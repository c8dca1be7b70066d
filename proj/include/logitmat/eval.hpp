#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logitmat/baselines.hpp"
#include "logitmat/core.hpp"
#include "logitmat/data.hpp"
#include "logitmat/trainer.hpp"

namespace logitmat {

// Mean absolute error; lengths must match and be non-zero.
double mae(std::span<const double> predictions, std::span<const double> truths);

// How an algorithm is queried by the harness. `predict` is the rating
// estimate scored by MAE, `score` the ranking key for top-k lists. Either may
// carry internal state (uniform-random draws), so call order matters.
struct Predictor {
  std::function<double(std::size_t user, std::size_t item)> predict;
  std::function<double(std::size_t user, std::size_t item)> score;
};

Predictor logitmat_predictor(const FactorModel& model,
                             PredictionRule rule = PredictionRule::kInnerProduct);
Predictor mf_predictor(const MfModel& model);
// uniform-random draws predictions and ranking scores from two streams
// derived from `seed`.
Predictor baseline_predictor(BaselineKind kind, const RatingDataset& train, std::uint64_t seed);

using TopKLists = std::map<std::uint32_t, std::vector<std::uint32_t>>;

// For every user with a test record: all items minus the user's training
// items, ordered by descending score then ascending item index, cut to k.
TopKLists topk_lists(const std::function<double(std::size_t, std::size_t)>& score,
                     const SplitPair& split, std::size_t k);

// Per-item exposure counts (dense item index -> count).
struct ExposureProfile {
  std::vector<std::uint64_t> counts;

  static ExposureProfile from_topk(const TopKLists& lists, std::size_t n_items);
  static ExposureProfile from_interactions(const RatingDataset& ds);
};

// OLS slope of ln(count) against ln(rank) over the positive counts sorted in
// descending order. Needs at least two positive counts.
double loglog_rank_slope(std::span<const std::uint64_t> counts);

// Degree of Matthew effect (log-log slope proxy): |slope(rec)| - |slope(train)|.
// Positive when recommendations concentrate exposure more steeply than the
// training interactions. Zero-count items are left out of both fits.
double matthew_degree(const ExposureProfile& rec, const ExposureProfile& train);

enum class GradientTarget { kLogitBranch, kComplementBranch, kBothBranches, kClassicMf };

using LogitGradientFn =
    std::function<FactorGradient(const FactorModel&, std::size_t, std::size_t, Branch)>;

// Maximum relative error |analytic - numeric| / max(1, |analytic|) between
// the analytic gradient and central differences of the loss with step `eps`,
// over `trials` random points (d = d_w = 8, entries uniform in [-1, 1]).
// `gradient` replaces grad_at for LogitMat targets when set.
double gradient_check(std::uint64_t seed, std::size_t trials, double eps,
                      GradientTarget target = GradientTarget::kBothBranches,
                      const LogitGradientFn& gradient = {});

enum class Algorithm { kClassicMf, kGlobalMean, kLogitMat, kUniformRandom, kUserMean };

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view name);
std::vector<Algorithm> all_algorithms();

struct ExternalAlgorithm {
  std::string name;
  std::vector<ExternalPrediction> predictions;
  std::optional<std::vector<ExternalTopK>> topk;
};

struct ReportRow {
  std::string algorithm;
  double mae;
  std::optional<double> matthew_degree;
  std::uint64_t seed;
  std::string config_fingerprint;
};

struct EvalReport {
  std::vector<ReportRow> rows;  // sorted by algorithm name
  std::string dataset_id;
  std::string split_fingerprint;
};

struct ComparisonOptions {
  std::vector<Algorithm> algorithms = all_algorithms();
  std::vector<ExternalAlgorithm> externals;
  TrainConfig config;
  std::size_t top_k = 10;
  PredictionRule rule = PredictionRule::kInnerProduct;
  std::string dataset_id;
  bool parallel = true;
};

// Predictions of `predictor` on every test record, in record order.
std::vector<double> predict_test(const Predictor& predictor, const RatingDataset& test);
std::vector<double> test_truths(const RatingDataset& test);

// MAE on the test records and the Matthew degree of the top-k lists against
// training exposure; the degree is empty when either profile has fewer than
// two exposed items.
ReportRow evaluate_predictor(const std::string& name, const Predictor& predictor,
                             const SplitPair& split, std::size_t top_k, std::uint64_t seed,
                             const std::string& config_fingerprint);

ReportRow evaluate_external(const ExternalAlgorithm& external, const SplitPair& split,
                            std::uint64_t seed, const std::string& config_fingerprint);

// Trains each in-process algorithm on split.train with config.seed and
// evaluates it; external algorithms contribute rows from their files.
EvalReport run_comparison(const SplitPair& split, const ComparisonOptions& options);

void write_report_csv(std::ostream& out, const EvalReport& report);

std::string fingerprint(std::string_view text);  // 16 hex digits, FNV-1a 64
std::string split_fingerprint(const SplitPair& split);

}  // namespace logitmat
