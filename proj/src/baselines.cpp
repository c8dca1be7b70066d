#include "logitmat/baselines.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "logitmat/core.hpp"
#include "logitmat/error.hpp"

namespace logitmat {

namespace {

void check_indices(const MfModel& model, std::size_t user, std::size_t item) {
  if (user >= model.n_users() || item >= model.n_items())
    throw Error(ErrorKind::kIndexOutOfRange,
                "(user " + std::to_string(user) + ", item " + std::to_string(item) +
                    ") outside the model grid");
}

}  // namespace

double MfModel::raw(std::size_t user, std::size_t item) const {
  check_indices(*this, user, item);
  return dot(user_factors.row(user), item_factors.row(item));
}

double MfModel::predict(std::size_t user, std::size_t item) const {
  return clamp_rating(raw(user, item), r_max);
}

void MfModel::validate() const {
  if (r_max < 1) throw Error(ErrorKind::kInvalidScale, "r_max must be >= 1");
  if (n_users() == 0 || n_items() == 0 || latent_dim() == 0)
    throw Error(ErrorKind::kInvalidShape, "empty factor matrices");
  if (item_factors.cols() != latent_dim())
    throw Error(ErrorKind::kInvalidShape, "user and item column counts disagree");
}

double mf_loss_at(const MfModel& model, std::size_t user, std::size_t item, double rating) {
  const double e = rating - model.raw(user, item);
  return e * e;
}

MfGradient mf_grad_at(const MfModel& model, std::size_t user, std::size_t item, double rating) {
  const double scale = -2.0 * (rating - model.raw(user, item));
  MfGradient g{std::vector<double>(model.latent_dim()), std::vector<double>(model.latent_dim())};
  const auto u = model.user_factors.row(user);
  const auto v = model.item_factors.row(item);
  for (std::size_t k = 0; k < u.size(); ++k) {
    g.user_factor[k] = scale * v[k];
    g.item_factor[k] = scale * u[k];
  }
  return g;
}

double mf_mean_squared_error(const MfModel& model, const RatingDataset& ds) {
  if (ds.empty()) throw Error(ErrorKind::kEmptyDataset, "mean squared error of an empty dataset");
  double sum = 0.0;
  for (const Rating& r : ds.records()) sum += mf_loss_at(model, r.user, r.item, r.value);
  return sum / static_cast<double>(ds.size());
}

MfModel init_mf_model(std::size_t n_users, std::size_t n_items, const TrainConfig& config,
                      Rng& rng) {
  if (n_users == 0 || n_items == 0)
    throw Error(ErrorKind::kInvalidShape, "cannot initialize a model with zero users or items");
  config.validate();
  MfModel model{Matrix(n_users, config.latent_dim), Matrix(n_items, config.latent_dim),
                config.r_max};
  for (double& x : model.user_factors.values()) x = rng.uniform(-config.init_scale, config.init_scale);
  for (double& x : model.item_factors.values()) x = rng.uniform(-config.init_scale, config.init_scale);
  return model;
}

void fit_classic_mf(MfModel& model, const RatingDataset& train, const TrainConfig& config,
                    Rng& rng) {
  if (train.empty()) throw Error(ErrorKind::kEmptyDataset, "classic MF needs training records");
  config.validate();
  model.validate();
  const auto records = train.records();
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  const double total = static_cast<double>(config.epochs);
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double rate = config.learning_rate;
    if (config.decay == LearningRateDecay::kLinear) rate *= 1.0 - static_cast<double>(epoch) / total;
    for (std::size_t idx : order) {
      const Rating& r = records[idx];
      auto u = model.user_factors.row(r.user);
      auto v = model.item_factors.row(r.item);
      const double step_scale = rate * 2.0 * (r.value - dot(u, v));
      if (!std::isfinite(step_scale)) throw Error::at_step(step, "non-finite residual");
      for (std::size_t k = 0; k < u.size(); ++k) {
        const double uk = u[k];
        u[k] += step_scale * v[k];
        v[k] += step_scale * uk;
      }
      ++step;
    }
  }
}

MfModel train_classic_mf(const RatingDataset& train, const TrainConfig& config) {
  if (train.empty()) throw Error(ErrorKind::kEmptyDataset, "classic MF needs training records");
  Rng rng(config.seed);
  MfModel model = init_mf_model(train.n_users(), train.n_items(), config, rng);
  fit_classic_mf(model, train, config, rng);
  return model;
}

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kGlobalMean: return "global-mean";
    case BaselineKind::kUserMean: return "user-mean";
    case BaselineKind::kUniformRandom: return "uniform-random";
  }
  return "unknown";
}

Baseline::Baseline(BaselineKind kind, const RatingDataset& train)
    : kind_(kind), r_max_(train.scale_max()) {
  if (kind == BaselineKind::kUniformRandom) return;
  if (train.empty()) throw Error(ErrorKind::kEmptyDataset, "mean baselines need training records");
  std::vector<double> sums(train.n_users(), 0.0);
  std::vector<std::size_t> counts(train.n_users(), 0);
  double total = 0.0;
  for (const Rating& r : train.records()) {
    total += r.value;
    sums[r.user] += r.value;
    ++counts[r.user];
  }
  global_mean_ = total / static_cast<double>(train.size());
  user_means_.resize(train.n_users());
  for (std::size_t u = 0; u < sums.size(); ++u) {
    if (counts[u] > 0) user_means_[u] = sums[u] / static_cast<double>(counts[u]);
  }
}

double Baseline::predict(std::size_t user, std::size_t /*item*/, Rng& rng) const {
  switch (kind_) {
    case BaselineKind::kGlobalMean:
      return global_mean_;
    case BaselineKind::kUserMean:
      if (user < user_means_.size() && user_means_[user]) return *user_means_[user];
      return global_mean_;
    case BaselineKind::kUniformRandom:
      return rng.uniform(1.0, static_cast<double>(r_max_));
  }
  return global_mean_;
}

double baseline_predict(BaselineKind kind, const RatingDataset& train, std::size_t user,
                        std::size_t item, Rng& rng) {
  return Baseline(kind, train).predict(user, item, rng);
}

}  // namespace logitmat
