#include "logitmat/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "logitmat/error.hpp"

namespace logitmat {

void TrainConfig::validate() const {
  if (latent_dim < 1 || coeff_dim < 1)
    throw Error(ErrorKind::kInvalidArgument, "latent_dim and coeff_dim must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw Error(ErrorKind::kInvalidArgument, "learning_rate must be positive");
  if (steps < 1) throw Error(ErrorKind::kInvalidArgument, "steps must be >= 1");
  if (epochs < 1) throw Error(ErrorKind::kInvalidArgument, "epochs must be >= 1");
  if (!(init_scale > 0.0) || !std::isfinite(init_scale))
    throw Error(ErrorKind::kInvalidArgument, "init_scale must be positive");
  if (r_max < 1) throw Error(ErrorKind::kInvalidScale, "r_max must be >= 1");
}

std::string TrainConfig::canonical() const {
  std::ostringstream out;
  out.precision(17);
  out << "latent_dim=" << latent_dim << ";coeff_dim=" << coeff_dim
      << ";learning_rate=" << learning_rate << ";steps=" << steps << ";epochs=" << epochs
      << ";seed=" << seed << ";init_scale=" << init_scale << ";pair_mode="
      << (pair_mode == PairMode::kUniformGrid ? "uniform-random" : "observed-positions")
      << ";r_max=" << r_max << ";decay=" << (decay == LearningRateDecay::kNone ? "none" : "linear");
  return out.str();
}

FactorModel init_model(std::size_t n_users, std::size_t n_items, const TrainConfig& config,
                       Rng& rng) {
  if (n_users == 0 || n_items == 0)
    throw Error(ErrorKind::kInvalidShape, "cannot initialize a model with zero users or items");
  config.validate();
  FactorModel model =
      FactorModel::zeros(n_users, n_items, config.latent_dim, config.coeff_dim, config.r_max);
  for (Matrix* m : {&model.user_factors, &model.item_factors, &model.user_coeffs,
                    &model.item_coeffs}) {
    for (double& x : m->values()) x = rng.uniform(-config.init_scale, config.init_scale);
  }
  return model;
}

FactorModel init_model(std::size_t n_users, std::size_t n_items, const TrainConfig& config) {
  Rng rng(config.seed);
  return init_model(n_users, n_items, config, rng);
}

Branch sample_branch(Rng& rng, const BranchSchedule& schedule) {
  // Exact rational draw: the complement branch owns one of total_weight slots.
  return rng.below(schedule.total_weight()) < schedule.logit_weight() ? Branch::kLogit
                                                                      : Branch::kComplement;
}

Position sample_pair(Rng& rng, PairMode mode, std::size_t n_users, std::size_t n_items,
                     std::span<const Position> observed) {
  if (mode == PairMode::kObservedPositions) {
    if (observed.empty())
      throw Error(ErrorKind::kEmptyDataset, "observed-positions mode needs at least one position");
    return observed[rng.below(observed.size())];
  }
  if (n_users == 0 || n_items == 0)
    throw Error(ErrorKind::kInvalidShape, "cannot sample from an empty grid");
  const auto user = static_cast<std::uint32_t>(rng.below(n_users));
  const auto item = static_cast<std::uint32_t>(rng.below(n_items));
  return {user, item};
}

void sgd_step(FactorModel& model, std::size_t user, std::size_t item, Branch branch,
              double learning_rate, std::size_t step) {
  const FactorGradient g = grad_at(model, user, item, branch);
  for (const auto* part : {&g.user_factor, &g.item_factor, &g.user_coeff, &g.item_coeff}) {
    for (double x : *part) {
      if (!std::isfinite(x)) throw Error::at_step(step, "non-finite gradient component");
    }
  }
  auto apply = [learning_rate](std::span<double> row, const std::vector<double>& grad) {
    for (std::size_t k = 0; k < row.size(); ++k) row[k] -= learning_rate * grad[k];
  };
  apply(model.user_factors.row(user), g.user_factor);
  apply(model.item_factors.row(item), g.item_factor);
  apply(model.user_coeffs.row(user), g.user_coeff);
  apply(model.item_coeffs.row(item), g.item_coeff);
}

TrainResult train_logitmat(std::size_t n_users, std::size_t n_items, const TrainConfig& config,
                           std::span<const Position> observed) {
  const auto started = std::chrono::steady_clock::now();
  Rng rng(config.seed);
  TrainResult result{init_model(n_users, n_items, config, rng), {}};
  for (const Position& p : observed) {
    if (p.user >= n_users || p.item >= n_items)
      throw Error(ErrorKind::kIndexOutOfRange, "observed position outside the model grid");
  }

  const BranchSchedule schedule(config.r_max);
  const PairMode mode = observed.empty() ? PairMode::kUniformGrid : config.pair_mode;
  const std::size_t record_every = std::max<std::size_t>(1, config.steps / 1000);
  const double total = static_cast<double>(config.steps);
  result.history.sampled_loss.reserve(config.steps / record_every + 1);

  for (std::size_t step = 0; step < config.steps; ++step) {
    const Position p = sample_pair(rng, mode, n_users, n_items, observed);
    const Branch branch = sample_branch(rng, schedule);
    if (step % record_every == 0) {
      result.history.sampled_loss.push_back(
          {step, branch, loss_at(result.model, p.user, p.item, branch)});
    }
    double rate = config.learning_rate;
    if (config.decay == LearningRateDecay::kLinear) rate *= 1.0 - static_cast<double>(step) / total;
    sgd_step(result.model, p.user, p.item, branch, rate, step);
  }
  result.history.wall_time = std::chrono::steady_clock::now() - started;
  return result;
}

}  // namespace logitmat
