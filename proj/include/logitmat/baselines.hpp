#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "logitmat/data.hpp"
#include "logitmat/matrix.hpp"
#include "logitmat/random.hpp"
#include "logitmat/trainer.hpp"

namespace logitmat {

// Classic matrix factorization: R_ui ~ U_u.V_i, fit by SGD on squared error
// over observed entries. No regularization and no bias terms.
struct MfModel {
  Matrix user_factors;
  Matrix item_factors;
  int r_max = 1;

  std::size_t n_users() const noexcept { return user_factors.rows(); }
  std::size_t n_items() const noexcept { return item_factors.rows(); }
  std::size_t latent_dim() const noexcept { return user_factors.cols(); }

  double raw(std::size_t user, std::size_t item) const;
  double predict(std::size_t user, std::size_t item) const;  // clamped to [1, r_max]

  void validate() const;
  friend bool operator==(const MfModel&, const MfModel&) = default;
};

struct MfGradient {
  std::vector<double> user_factor;
  std::vector<double> item_factor;
};

// Per-entry term (rating - U_u.V_i)^2 and its gradient.
double mf_loss_at(const MfModel& model, std::size_t user, std::size_t item, double rating);
MfGradient mf_grad_at(const MfModel& model, std::size_t user, std::size_t item, double rating);

// Mean of (rating - U_u.V_i)^2 over the dataset's records.
double mf_mean_squared_error(const MfModel& model, const RatingDataset& ds);

MfModel init_mf_model(std::size_t n_users, std::size_t n_items, const TrainConfig& config,
                      Rng& rng);

// Runs config.epochs passes, each over a fresh seeded shuffle of the
// training records. Updates use the pre-step factors of both rows.
void fit_classic_mf(MfModel& model, const RatingDataset& train, const TrainConfig& config,
                    Rng& rng);

// Initializes from config.seed and fits; dims come from the dataset's maps.
MfModel train_classic_mf(const RatingDataset& train, const TrainConfig& config);

enum class BaselineKind { kGlobalMean, kUserMean, kUniformRandom };

std::string_view to_string(BaselineKind kind);

// Precomputed trivial predictors. Mean kinds require a non-empty train set.
class Baseline {
 public:
  Baseline(BaselineKind kind, const RatingDataset& train);

  BaselineKind kind() const noexcept { return kind_; }
  double global_mean() const noexcept { return global_mean_; }

  // uniform-random draws from `rng`; the mean kinds ignore it.
  double predict(std::size_t user, std::size_t item, Rng& rng) const;

 private:
  BaselineKind kind_;
  int r_max_;
  double global_mean_ = 0.0;
  std::vector<std::optional<double>> user_means_;
};

double baseline_predict(BaselineKind kind, const RatingDataset& train, std::size_t user,
                        std::size_t item, Rng& rng);

}  // namespace logitmat
