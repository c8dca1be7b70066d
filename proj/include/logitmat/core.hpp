#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "logitmat/matrix.hpp"

namespace logitmat {

// Latent state of a LogitMat model. User rows of `user_factors` and
// `user_coeffs` are indexed by dense user index, item rows likewise.
struct FactorModel {
  Matrix user_factors;  // n_users x latent_dim
  Matrix item_factors;  // n_items x latent_dim
  Matrix user_coeffs;   // n_users x coeff_dim
  Matrix item_coeffs;   // n_items x coeff_dim
  int r_max = 1;

  static FactorModel zeros(std::size_t n_users, std::size_t n_items, std::size_t latent_dim,
                           std::size_t coeff_dim, int r_max);

  std::size_t n_users() const noexcept { return user_factors.rows(); }
  std::size_t n_items() const noexcept { return item_factors.rows(); }
  std::size_t latent_dim() const noexcept { return user_factors.cols(); }
  std::size_t coeff_dim() const noexcept { return user_coeffs.cols(); }

  bool all_finite() const noexcept;

  // Throws kInvalidShape / kInvalidScale when the shape or r_max invariants fail.
  void validate() const;

  friend bool operator==(const FactorModel&, const FactorModel&) = default;
};

// Which logit expression a training step fits: the sigmoid itself or its
// complement 1 - sigmoid.
enum class Branch : int { kLogit = 1, kComplement = 2 };

// Branch probabilities for a rating scale with `levels` integer levels.
// Level weights are the rating values themselves (levels, levels-1, ..., 1),
// so with S = levels(levels+1)/2 the logit branch has probability (S-1)/S and
// the complement branch 1/S. Both are kept as exact rationals over S.
class BranchSchedule {
 public:
  explicit BranchSchedule(int levels);

  int levels() const noexcept { return levels_; }
  std::uint64_t total_weight() const noexcept { return total_; }
  std::uint64_t logit_weight() const noexcept { return total_ - 1; }

  double p_logit() const noexcept { return p_logit_; }
  double p_complement() const noexcept { return p_complement_; }

 private:
  int levels_;
  std::uint64_t total_;
  double p_logit_;
  double p_complement_;
};

BranchSchedule branch_schedule(int levels);

// Logistic function, evaluated in the overflow-free form on each side of 0.
// Arguments are clamped to [-700, 700] first.
double sigmoid(double x) noexcept;

struct FactorGradient {
  std::vector<double> user_factor;
  std::vector<double> item_factor;
  std::vector<double> user_coeff;
  std::vector<double> item_coeff;
};

// Squared residual between the scaled inner product U_u.V_i / r_max and the
// branch target sigmoid(c*d) (or its complement), with c = W_u.Z_i and
// d = U_u.V_i.
double loss_at(const FactorModel& model, std::size_t user, std::size_t item, Branch branch);

// Exact gradient of loss_at with respect to U_u, V_i, W_u and Z_i.
FactorGradient grad_at(const FactorModel& model, std::size_t user, std::size_t item,
                       Branch branch);

enum class PredictionRule {
  kInnerProduct,   // clamp(U_u.V_i, 1, r_max)
  kScaledSigmoid,  // clamp(r_max * sigmoid(W_u.Z_i * U_u.V_i), 1, r_max)
};

struct Prediction {
  double value;  // clamped to [1, r_max]
  double raw;
};

Prediction predict_rating(const FactorModel& model, std::size_t user, std::size_t item,
                          PredictionRule rule = PredictionRule::kInnerProduct);

double clamp_rating(double raw, int r_max) noexcept;

}  // namespace logitmat
