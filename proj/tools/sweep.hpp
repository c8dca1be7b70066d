#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "logitmat/eval.hpp"

namespace logitmat::lab {

struct SweepRow {
  double learning_rate;
  std::string algorithm;
  double mae;                           // mean over seeds
  std::optional<double> matthew_degree; // mean over seeds; empty if any seed had none
};

struct SweepDetailRow {
  double learning_rate;
  std::uint64_t seed;
  ReportRow row;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (learning_rate, algorithm)
  std::vector<SweepDetailRow> detail;
};

// One comparison per (learning rate, seed). Seeds are base.seed,
// base.seed + 1, ... (`repeats` of them). Rates must be positive and strictly
// increasing.
SweepResult run_sweep(const SplitPair& split, const ComparisonOptions& base,
                      const std::vector<double>& rates, std::size_t repeats = 1);

void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_sweep_detail_csv(std::ostream& out, const SweepResult& result);

// Line chart of MAE against learning rate (log scale), one series per
// algorithm.
void write_sweep_svg(std::ostream& out, const SweepResult& result);

}  // namespace logitmat::lab
