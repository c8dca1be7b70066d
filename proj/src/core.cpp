#include "logitmat/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "logitmat/error.hpp"

namespace logitmat {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kInvalidScale: return "invalid-scale";
    case ErrorKind::kInvalidShape: return "invalid-shape";
    case ErrorKind::kIndexOutOfRange: return "index-out-of-range";
    case ErrorKind::kEmptyDataset: return "empty-dataset";
    case ErrorKind::kMalformedLine: return "malformed-line";
    case ErrorKind::kRatingOutOfRange: return "rating-out-of-range";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kCoverage: return "coverage";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kVersionMismatch: return "version-mismatch";
    case ErrorKind::kTruncated: return "truncated";
    case ErrorKind::kShapeMismatch: return "shape-mismatch";
  }
  return "unknown";
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
  return sum;
}

FactorModel FactorModel::zeros(std::size_t n_users, std::size_t n_items, std::size_t latent_dim,
                               std::size_t coeff_dim, int r_max) {
  FactorModel m{Matrix(n_users, latent_dim), Matrix(n_items, latent_dim),
                Matrix(n_users, coeff_dim), Matrix(n_items, coeff_dim), r_max};
  m.validate();
  return m;
}

bool FactorModel::all_finite() const noexcept {
  return user_factors.all_finite() && item_factors.all_finite() && user_coeffs.all_finite() &&
         item_coeffs.all_finite();
}

void FactorModel::validate() const {
  if (r_max < 1) throw Error(ErrorKind::kInvalidScale, "r_max must be >= 1");
  if (n_users() == 0 || n_items() == 0)
    throw Error(ErrorKind::kInvalidShape, "model needs at least one user and one item");
  if (latent_dim() == 0 || coeff_dim() == 0)
    throw Error(ErrorKind::kInvalidShape, "latent and coefficient dimensions must be >= 1");
  if (user_coeffs.rows() != n_users() || item_coeffs.rows() != n_items())
    throw Error(ErrorKind::kInvalidShape, "coefficient rows disagree with factor rows");
  if (item_factors.cols() != latent_dim() || item_coeffs.cols() != coeff_dim())
    throw Error(ErrorKind::kInvalidShape, "user and item column counts disagree");
}

BranchSchedule::BranchSchedule(int levels) : levels_(levels) {
  if (levels < 1) throw Error(ErrorKind::kInvalidScale, "rating levels must be >= 1");
  const auto k = static_cast<std::uint64_t>(levels);
  total_ = k * (k + 1) / 2;
  p_complement_ = 1.0 / static_cast<double>(total_);
  p_logit_ = static_cast<double>(total_ - 1) / static_cast<double>(total_);
}

BranchSchedule branch_schedule(int levels) { return BranchSchedule(levels); }

double sigmoid(double x) noexcept {
  x = std::clamp(x, -700.0, 700.0);
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

void check_indices(const FactorModel& model, std::size_t user, std::size_t item) {
  if (user >= model.n_users() || item >= model.n_items()) {
    throw Error(ErrorKind::kIndexOutOfRange,
                "(user " + std::to_string(user) + ", item " + std::to_string(item) +
                    ") outside " + std::to_string(model.n_users()) + "x" +
                    std::to_string(model.n_items()));
  }
}

// Scalars shared by the loss and its gradient at one (user, item, branch).
struct Terms {
  double inner;       // d = U_u.V_i
  double coeff;       // c = W_u.Z_i
  double residual;    // U_u.V_i / r_max - target
  double target_slope;  // d target / d(c*d): s' for the logit branch, -s' for the complement
};

Terms terms_at(const FactorModel& model, std::size_t user, std::size_t item, Branch branch) {
  check_indices(model, user, item);
  const double inner = dot(model.user_factors.row(user), model.item_factors.row(item));
  const double coeff = dot(model.user_coeffs.row(user), model.item_coeffs.row(item));
  const double s = sigmoid(coeff * inner);
  const double slope = s * (1.0 - s);
  const double scaled = inner / model.r_max;
  if (branch == Branch::kLogit) return {inner, coeff, scaled - s, slope};
  return {inner, coeff, scaled - (1.0 - s), -slope};
}

}  // namespace

double loss_at(const FactorModel& model, std::size_t user, std::size_t item, Branch branch) {
  const Terms t = terms_at(model, user, item, branch);
  return t.residual * t.residual;
}

// With e the residual and t'(x) the target slope at x = c*d:
//   dL/dU_u = 2e (V_i / r_max - t' c V_i)     dL/dW_u = -2e t' d Z_i
//   dL/dV_i = 2e (U_u / r_max - t' c U_u)     dL/dZ_i = -2e t' d W_u
// A shorter form of the logit-branch gradient that drops the 2e factor is
// sometimes quoted; it is not the derivative of this loss and is not used.
FactorGradient grad_at(const FactorModel& model, std::size_t user, std::size_t item,
                       Branch branch) {
  const Terms t = terms_at(model, user, item, branch);
  const double two_e = 2.0 * t.residual;
  const double factor_scale = two_e * (1.0 / model.r_max - t.target_slope * t.coeff);
  const double coeff_scale = -two_e * t.target_slope * t.inner;

  auto scaled = [](std::span<const double> row, double s) {
    std::vector<double> out(row.size());
    for (std::size_t k = 0; k < row.size(); ++k) out[k] = s * row[k];
    return out;
  };
  return {scaled(model.item_factors.row(item), factor_scale),
          scaled(model.user_factors.row(user), factor_scale),
          scaled(model.item_coeffs.row(item), coeff_scale),
          scaled(model.user_coeffs.row(user), coeff_scale)};
}

double clamp_rating(double raw, int r_max) noexcept {
  return std::clamp(raw, 1.0, static_cast<double>(r_max));
}

Prediction predict_rating(const FactorModel& model, std::size_t user, std::size_t item,
                          PredictionRule rule) {
  check_indices(model, user, item);
  const double inner = dot(model.user_factors.row(user), model.item_factors.row(item));
  double raw = inner;
  if (rule == PredictionRule::kScaledSigmoid) {
    const double coeff = dot(model.user_coeffs.row(user), model.item_coeffs.row(item));
    raw = model.r_max * sigmoid(coeff * inner);
  }
  return {clamp_rating(raw, model.r_max), raw};
}

}  // namespace logitmat
