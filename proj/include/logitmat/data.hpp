#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "logitmat/trainer.hpp"

namespace logitmat {

// Bijection between external ids and dense indices 0..n-1, assigned in
// first-appearance order.
class IdIndex {
 public:
  // Returns the dense index, assigning the next one if `id` is new.
  std::uint32_t intern(const std::string& id);
  std::optional<std::uint32_t> find(const std::string& id) const;
  const std::string& external(std::uint32_t index) const { return ids_.at(index); }
  std::size_t size() const noexcept { return ids_.size(); }
  std::span<const std::string> ids() const noexcept { return ids_; }

  friend bool operator==(const IdIndex& a, const IdIndex& b) { return a.ids_ == b.ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
};

struct Rating {
  std::uint32_t user;  // dense
  std::uint32_t item;  // dense
  int value;
  std::optional<std::int64_t> timestamp;
  friend bool operator==(const Rating&, const Rating&) = default;
};

// Immutable bag of rating records on a declared 1..scale_max scale. Index
// maps are shared between datasets derived from one another (splits,
// subsamples), so dense indices agree across them.
class RatingDataset {
 public:
  RatingDataset(std::vector<Rating> records, std::shared_ptr<const IdIndex> users,
                std::shared_ptr<const IdIndex> items, int scale_max,
                std::vector<std::string> context = {}, std::vector<std::string> context_columns = {});

  std::span<const Rating> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  int scale_max() const noexcept { return scale_max_; }

  const IdIndex& users() const noexcept { return *users_; }
  const IdIndex& items() const noexcept { return *items_; }
  std::shared_ptr<const IdIndex> user_index() const noexcept { return users_; }
  std::shared_ptr<const IdIndex> item_index() const noexcept { return items_; }
  std::size_t n_users() const noexcept { return users_->size(); }
  std::size_t n_items() const noexcept { return items_->size(); }

  // Opaque per-record metadata (unused columns of a contextual dataset),
  // empty or one entry per record.
  std::span<const std::string> context() const noexcept { return context_; }
  std::span<const std::string> context_columns() const noexcept { return context_columns_; }

  std::vector<Position> positions() const { return positions_of(records_); }
  static std::vector<Position> positions_of(std::span<const Rating> records);

  // Same index maps and scale, a subset of records (in the given order).
  RatingDataset select(std::span<const std::size_t> record_indices) const;

  friend bool operator==(const RatingDataset& a, const RatingDataset& b);

 private:
  std::vector<Rating> records_;
  std::shared_ptr<const IdIndex> users_;
  std::shared_ptr<const IdIndex> items_;
  int scale_max_;
  std::vector<std::string> context_;
  std::vector<std::string> context_columns_;
};

// Accumulates raw records and resolves duplicate (user, item) pairs: the
// later timestamp wins; on equal or missing timestamps the later record wins.
// The surviving record keeps the slot of the first occurrence.
class DatasetBuilder {
 public:
  explicit DatasetBuilder(int scale_max);

  // Throws kRatingOutOfRange (tagged with `line` when non-zero).
  void add(const std::string& user, const std::string& item, int rating,
           std::optional<std::int64_t> timestamp, std::size_t line = 0, std::string context = {});
  void set_context_columns(std::vector<std::string> columns) { context_columns_ = std::move(columns); }

  std::size_t size() const noexcept { return records_.size(); }
  RatingDataset build() &&;

 private:
  int scale_max_;
  std::shared_ptr<IdIndex> users_;
  std::shared_ptr<IdIndex> items_;
  std::vector<Rating> records_;
  std::vector<std::string> context_;
  std::vector<std::string> context_columns_;
  std::unordered_map<std::uint64_t, std::size_t> slot_;
};

// MovieLens-1M `UserID::MovieID::Rating::Timestamp` lines, scale 1..5.
RatingDataset parse_movielens(std::istream& in);

struct LdosColumns {
  std::string user = "userID";
  std::string item = "itemID";
  std::string rating = "rating";
};

// Comma-separated file with a header row; the three named columns are
// required, all others are kept as per-record context. Scale 1..5.
RatingDataset parse_ldos(std::istream& in, const LdosColumns& columns = {});

// Canonical interchange CSV: header `user,item,rating,timestamp`, timestamp
// blank when absent.
void write_interchange_csv(std::ostream& out, const RatingDataset& ds);
RatingDataset parse_interchange_csv(std::istream& in, int scale_max = 5);

struct SplitPair {
  RatingDataset train;
  RatingDataset test;
};

// Record-level uniform split with round(test_fraction * N) test records.
// Both halves keep the original record order and share the index maps.
SplitPair split_holdout(const RatingDataset& ds, double test_fraction, std::uint64_t seed);

// Interchange train and test files read into one pair of index maps; train
// records are interned first.
SplitPair load_split(std::istream& train, std::istream& test, int scale_max = 5);

// Uniform record-level subsample of round(fraction * N) records (at least 1).
RatingDataset subsample(const RatingDataset& ds, double fraction, std::uint64_t seed);

// round(density * n_users * n_items) distinct cells chosen uniformly, each
// rated v with probability v / (k(k+1)/2). External ids are the grid
// coordinates as decimal strings; records are in row-major cell order.
RatingDataset generate_zipf_synthetic(std::size_t n_users, std::size_t n_items, int levels,
                                      double density, std::uint64_t seed);

// `user,item,prediction` rows keyed by external ids.
struct ExternalPrediction {
  std::string user;
  std::string item;
  double prediction;
};
std::vector<ExternalPrediction> parse_prediction_file(std::istream& in);
void write_prediction_file(std::ostream& out, std::span<const ExternalPrediction> rows);

// `user,rank,item` rows; rank is 1-based.
struct ExternalTopK {
  std::string user;
  std::size_t rank;
  std::string item;
};
std::vector<ExternalTopK> parse_topk_file(std::istream& in);

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double x);

}  // namespace logitmat
