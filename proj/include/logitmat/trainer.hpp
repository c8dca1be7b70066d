#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "logitmat/core.hpp"
#include "logitmat/random.hpp"

namespace logitmat {

// A (user, item) cell. Carries no rating value: this is the only view of a
// dataset the LogitMat trainer ever receives.
struct Position {
  std::uint32_t user;
  std::uint32_t item;
  friend bool operator==(const Position&, const Position&) = default;
};

enum class PairMode { kUniformGrid, kObservedPositions };
enum class LearningRateDecay { kNone, kLinear };

struct TrainConfig {
  std::size_t latent_dim = 8;
  std::size_t coeff_dim = 8;
  double learning_rate = 0.01;
  std::size_t steps = 200000;
  // Passes over the observed entries for classic matrix factorization, which
  // iterates by epoch rather than by sampled step.
  std::size_t epochs = 200;
  std::uint64_t seed = 1;
  double init_scale = 0.1;
  PairMode pair_mode = PairMode::kObservedPositions;
  int r_max = 5;
  LearningRateDecay decay = LearningRateDecay::kNone;

  // Throws kInvalidArgument on a non-positive rate/step count/dimension.
  void validate() const;
  // Canonical key=value rendering, stable across runs; used for fingerprints.
  std::string canonical() const;
};

struct LossSample {
  std::size_t step;
  Branch branch;
  double loss;
};

struct TrainHistory {
  std::vector<LossSample> sampled_loss;
  std::chrono::nanoseconds wall_time{0};
};

struct TrainResult {
  FactorModel model;
  TrainHistory history;
};

FactorModel init_model(std::size_t n_users, std::size_t n_items, const TrainConfig& config,
                       Rng& rng);
FactorModel init_model(std::size_t n_users, std::size_t n_items, const TrainConfig& config);

Branch sample_branch(Rng& rng, const BranchSchedule& schedule);

// In observed-positions mode the pair is drawn uniformly from `observed`,
// which must be non-empty; otherwise uniformly from the n_users x n_items grid.
Position sample_pair(Rng& rng, PairMode mode, std::size_t n_users, std::size_t n_items,
                     std::span<const Position> observed = {});

// One gradient step on rows U_u, V_i, W_u, Z_i. Throws a kDivergence error
// tagged with `step` if any gradient component is non-finite; the model is
// left untouched in that case.
void sgd_step(FactorModel& model, std::size_t user, std::size_t item, Branch branch,
              double learning_rate, std::size_t step = 0);

// Runs config.steps iterations of: sample pair, sample branch, step. The
// rating levels of the branch schedule are config.r_max. `observed` is only
// consulted in observed-positions mode; an empty span falls back to the
// uniform grid.
TrainResult train_logitmat(std::size_t n_users, std::size_t n_items, const TrainConfig& config,
                           std::span<const Position> observed = {});

}  // namespace logitmat
