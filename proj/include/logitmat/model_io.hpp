#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <variant>

#include "logitmat/baselines.hpp"
#include "logitmat/core.hpp"

namespace logitmat {

// Binary model file, little-endian:
//   magic "LOGITMAT" | u32 version | u32 kind (1 = LogitMat, 2 = classic MF)
//   | u64 n_users | u64 n_items | u64 latent_dim | u64 coeff_dim | i32 r_max
//   then one block per matrix: u64 rows | u64 cols | rows*cols IEEE-754 doubles.
// LogitMat stores four blocks (U, V, W, Z), classic MF two (U, V) with
// coeff_dim = 0.
inline constexpr std::uint32_t kModelFormatVersion = 1;

using AnyModel = std::variant<FactorModel, MfModel>;

void write_model(std::ostream& out, const AnyModel& model);
// Errors: kFormat (bad magic or kind, trailing bytes), kVersionMismatch,
// kTruncated, kShapeMismatch (block shape disagrees with the header).
AnyModel read_model(std::istream& in);

void persist_model(const AnyModel& model, const std::filesystem::path& path);
AnyModel load_model(const std::filesystem::path& path);

// Human-readable dump: `matrix,row,col,value` rows at round-trip precision.
void export_model_csv(std::ostream& out, const AnyModel& model);

}  // namespace logitmat
