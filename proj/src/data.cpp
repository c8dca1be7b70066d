#include "logitmat/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <string_view>
#include <unordered_set>

#include "logitmat/error.hpp"
#include "logitmat/random.hpp"

namespace logitmat {

std::uint32_t IdIndex::intern(const std::string& id) {
  auto [it, inserted] = lookup_.try_emplace(id, static_cast<std::uint32_t>(ids_.size()));
  if (inserted) ids_.push_back(id);
  return it->second;
}

std::optional<std::uint32_t> IdIndex::find(const std::string& id) const {
  auto it = lookup_.find(id);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

RatingDataset::RatingDataset(std::vector<Rating> records, std::shared_ptr<const IdIndex> users,
                             std::shared_ptr<const IdIndex> items, int scale_max,
                             std::vector<std::string> context,
                             std::vector<std::string> context_columns)
    : records_(std::move(records)),
      users_(std::move(users)),
      items_(std::move(items)),
      scale_max_(scale_max),
      context_(std::move(context)),
      context_columns_(std::move(context_columns)) {
  if (scale_max_ < 1) throw Error(ErrorKind::kInvalidScale, "scale_max must be >= 1");
  if (!context_.empty() && context_.size() != records_.size())
    throw Error(ErrorKind::kInvalidShape, "context must have one entry per record");
  for (const Rating& r : records_) {
    if (r.value < 1 || r.value > scale_max_)
      throw Error(ErrorKind::kRatingOutOfRange,
                  "rating " + std::to_string(r.value) + " outside [1, " +
                      std::to_string(scale_max_) + "]");
    if (r.user >= users_->size() || r.item >= items_->size())
      throw Error(ErrorKind::kIndexOutOfRange, "record refers to an unknown dense index");
  }
}

std::vector<Position> RatingDataset::positions_of(std::span<const Rating> records) {
  std::vector<Position> out;
  out.reserve(records.size());
  for (const Rating& r : records) out.push_back({r.user, r.item});
  return out;
}

RatingDataset RatingDataset::select(std::span<const std::size_t> record_indices) const {
  std::vector<Rating> records;
  std::vector<std::string> context;
  records.reserve(record_indices.size());
  for (std::size_t idx : record_indices) {
    records.push_back(records_.at(idx));
    if (!context_.empty()) context.push_back(context_[idx]);
  }
  return RatingDataset(std::move(records), users_, items_, scale_max_, std::move(context),
                       context_columns_);
}

bool operator==(const RatingDataset& a, const RatingDataset& b) {
  return a.scale_max_ == b.scale_max_ && a.records_ == b.records_ && *a.users_ == *b.users_ &&
         *a.items_ == *b.items_ && a.context_ == b.context_ &&
         a.context_columns_ == b.context_columns_;
}

DatasetBuilder::DatasetBuilder(int scale_max)
    : scale_max_(scale_max),
      users_(std::make_shared<IdIndex>()),
      items_(std::make_shared<IdIndex>()) {
  if (scale_max < 1) throw Error(ErrorKind::kInvalidScale, "scale_max must be >= 1");
}

void DatasetBuilder::add(const std::string& user, const std::string& item, int rating,
                         std::optional<std::int64_t> timestamp, std::size_t line,
                         std::string context) {
  if (rating < 1 || rating > scale_max_) {
    const std::string msg = "rating " + std::to_string(rating) + " outside [1, " +
                            std::to_string(scale_max_) + "]";
    if (line != 0) throw Error::at_line(ErrorKind::kRatingOutOfRange, line, msg);
    throw Error(ErrorKind::kRatingOutOfRange, msg);
  }
  const std::uint32_t u = users_->intern(user);
  const std::uint32_t i = items_->intern(item);
  const Rating record{u, i, rating, timestamp};
  const std::uint64_t key = (static_cast<std::uint64_t>(u) << 32) | i;
  auto [it, inserted] = slot_.try_emplace(key, records_.size());
  if (inserted) {
    records_.push_back(record);
    context_.push_back(std::move(context));
    return;
  }
  Rating& existing = records_[it->second];
  const bool older = existing.timestamp && timestamp && *timestamp < *existing.timestamp;
  if (!older) {
    existing = record;
    context_[it->second] = std::move(context);
  }
}

RatingDataset DatasetBuilder::build() && {
  const bool has_context = std::any_of(context_.begin(), context_.end(),
                                       [](const std::string& c) { return !c.empty(); }) ||
                           !context_columns_.empty();
  if (!has_context) context_.clear();
  return RatingDataset(std::move(records_), std::move(users_), std::move(items_), scale_max_,
                       std::move(context_), std::move(context_columns_));
}

namespace {

std::vector<std::string_view> split(std::string_view line, std::string_view delim) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + delim.size();
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

// Ratings may be written as "4" or "4.0"; anything non-integral is rejected.
std::optional<int> parse_rating(std::string_view s) {
  if (auto v = parse_number<int>(s)) return v;
  auto d = parse_number<double>(s);
  if (!d || !std::isfinite(*d) || std::floor(*d) != *d || std::abs(*d) > 1e9) return std::nullopt;
  return static_cast<int>(*d);
}

bool getline_stripped(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::string_view strip_bom(std::string_view s) {
  if (s.size() >= 3 && s.substr(0, 3) == "\xEF\xBB\xBF") s.remove_prefix(3);
  return s;
}

// Header columns -> position; the header must carry every name in `required`.
std::vector<std::size_t> locate_columns(std::span<const std::string_view> header,
                                        std::span<const std::string> required) {
  std::vector<std::size_t> out;
  for (const std::string& name : required) {
    auto it = std::find_if(header.begin(), header.end(),
                           [&](std::string_view h) { return trim(h) == name; });
    if (it == header.end()) throw Error(ErrorKind::kSchema, name);
    out.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  return out;
}

}  // namespace

RatingDataset parse_movielens(std::istream& in) {
  DatasetBuilder builder(5);
  std::string line;
  std::size_t line_no = 0;
  while (getline_stripped(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, "::");
    if (fields.size() != 4)
      throw Error::at_line(ErrorKind::kMalformedLine, line_no,
                           "expected UserID::MovieID::Rating::Timestamp");
    const auto rating = parse_number<int>(fields[2]);
    const auto ts = parse_number<std::int64_t>(fields[3]);
    const std::string_view user = trim(fields[0]);
    const std::string_view item = trim(fields[1]);
    if (!rating || !ts || user.empty() || item.empty())
      throw Error::at_line(ErrorKind::kMalformedLine, line_no, "unparsable field");
    builder.add(std::string(user), std::string(item), *rating, *ts, line_no);
  }
  return std::move(builder).build();
}

RatingDataset parse_ldos(std::istream& in, const LdosColumns& columns) {
  std::string line;
  if (!getline_stripped(in, line)) throw Error(ErrorKind::kSchema, columns.user);
  const std::string header_line(strip_bom(line));
  const auto header = split(header_line, ",");
  const std::vector<std::string> required{columns.user, columns.item, columns.rating};
  const auto idx = locate_columns(header, required);

  std::vector<std::size_t> extra;
  std::vector<std::string> extra_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (std::find(idx.begin(), idx.end(), c) == idx.end()) {
      extra.push_back(c);
      extra_names.emplace_back(trim(header[c]));
    }
  }

  DatasetBuilder builder(5);
  builder.set_context_columns(extra_names);
  std::size_t line_no = 1;
  while (getline_stripped(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ",");
    if (fields.size() != header.size())
      throw Error::at_line(ErrorKind::kMalformedLine, line_no,
                           "expected " + std::to_string(header.size()) + " fields");
    const auto rating = parse_rating(fields[idx[2]]);
    if (!rating)
      throw Error::at_line(ErrorKind::kParse, line_no,
                           "unparsable rating '" + std::string(trim(fields[idx[2]])) + "'");
    std::string context;
    for (std::size_t c : extra) {
      if (!context.empty()) context += ',';
      context += trim(fields[c]);
    }
    builder.add(std::string(trim(fields[idx[0]])), std::string(trim(fields[idx[1]])), *rating,
                std::nullopt, line_no, std::move(context));
  }
  return std::move(builder).build();
}

void write_interchange_csv(std::ostream& out, const RatingDataset& ds) {
  out << "user,item,rating,timestamp\n";
  for (const Rating& r : ds.records()) {
    out << ds.users().external(r.user) << ',' << ds.items().external(r.item) << ',' << r.value
        << ',';
    if (r.timestamp) out << *r.timestamp;
    out << '\n';
  }
}

namespace {

void read_interchange_into(std::istream& in, DatasetBuilder& builder,
                           std::vector<std::size_t>* slots = nullptr) {
  std::string line;
  if (!getline_stripped(in, line)) throw Error(ErrorKind::kSchema, "user");
  const std::string header_line(strip_bom(line));
  const auto header = split(header_line, ",");
  const std::vector<std::string> required{"user", "item", "rating", "timestamp"};
  const auto idx = locate_columns(header, required);
  std::size_t line_no = 1;
  while (getline_stripped(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ",");
    if (fields.size() != header.size())
      throw Error::at_line(ErrorKind::kMalformedLine, line_no,
                           "expected " + std::to_string(header.size()) + " fields");
    const auto rating = parse_rating(fields[idx[2]]);
    if (!rating) throw Error::at_line(ErrorKind::kParse, line_no, "unparsable rating");
    std::optional<std::int64_t> ts;
    if (!trim(fields[idx[3]]).empty()) {
      ts = parse_number<std::int64_t>(fields[idx[3]]);
      if (!ts) throw Error::at_line(ErrorKind::kParse, line_no, "unparsable timestamp");
    }
    const std::size_t before = builder.size();
    builder.add(std::string(trim(fields[idx[0]])), std::string(trim(fields[idx[1]])), *rating, ts,
                line_no);
    if (slots && builder.size() != before) slots->push_back(before);
  }
}

}  // namespace

RatingDataset parse_interchange_csv(std::istream& in, int scale_max) {
  DatasetBuilder builder(scale_max);
  read_interchange_into(in, builder);
  return std::move(builder).build();
}

SplitPair load_split(std::istream& train, std::istream& test, int scale_max) {
  DatasetBuilder builder(scale_max);
  std::vector<std::size_t> train_slots, test_slots;
  read_interchange_into(train, builder, &train_slots);
  read_interchange_into(test, builder, &test_slots);
  const RatingDataset all = std::move(builder).build();
  return {all.select(train_slots), all.select(test_slots)};
}

SplitPair split_holdout(const RatingDataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(ErrorKind::kInvalidArgument, "test fraction must lie in (0, 1)");
  if (ds.size() < 2) throw Error(ErrorKind::kEmptyDataset, "split needs at least two records");
  const std::size_t n = ds.size();
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {ds.select(train), ds.select(test)};
}

RatingDataset subsample(const RatingDataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw Error(ErrorKind::kInvalidArgument, "subsample fraction must lie in (0, 1]");
  if (ds.empty()) throw Error(ErrorKind::kEmptyDataset, "cannot subsample an empty dataset");
  const std::size_t n = ds.size();
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return ds.select(order);
}

RatingDataset generate_zipf_synthetic(std::size_t n_users, std::size_t n_items, int levels,
                                      double density, std::uint64_t seed) {
  if (n_users == 0 || n_items == 0)
    throw Error(ErrorKind::kInvalidShape, "synthetic grid needs users and items");
  const BranchSchedule weights(levels);  // validates levels >= 1; total = k(k+1)/2
  if (!(density > 0.0 && density <= 1.0))
    throw Error(ErrorKind::kInvalidArgument, "density must lie in (0, 1]");
  const std::uint64_t cells = static_cast<std::uint64_t>(n_users) * n_items;
  const double wanted = density * static_cast<double>(cells);
  if (wanted < 1.0) throw Error(ErrorKind::kInvalidArgument, "density * users * items < 1");
  const auto count = std::min<std::uint64_t>(cells, static_cast<std::uint64_t>(std::llround(wanted)));

  Rng rng(seed);
  // Floyd's algorithm: `count` distinct cells, each subset equally likely.
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(count * 2);
  for (std::uint64_t j = cells - count; j < cells; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> sorted(chosen.begin(), chosen.end());
  std::sort(sorted.begin(), sorted.end());

  DatasetBuilder builder(levels);
  for (std::uint64_t cell : sorted) {
    std::uint64_t slot = rng.below(weights.total_weight());
    int value = 1;
    while (slot >= static_cast<std::uint64_t>(value)) {
      slot -= static_cast<std::uint64_t>(value);
      ++value;
    }
    builder.add(std::to_string(cell / n_items), std::to_string(cell % n_items), value,
                std::nullopt);
  }
  return std::move(builder).build();
}

std::vector<ExternalPrediction> parse_prediction_file(std::istream& in) {
  std::string line;
  if (!getline_stripped(in, line)) throw Error(ErrorKind::kSchema, "user");
  const std::string header_line(strip_bom(line));
  const auto header = split(header_line, ",");
  const std::vector<std::string> required{"user", "item", "prediction"};
  const auto idx = locate_columns(header, required);
  std::vector<ExternalPrediction> rows;
  std::size_t line_no = 1;
  while (getline_stripped(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ",");
    if (fields.size() != header.size())
      throw Error::at_line(ErrorKind::kMalformedLine, line_no, "wrong field count");
    const auto value = parse_number<double>(fields[idx[2]]);
    if (!value || !std::isfinite(*value))
      throw Error::at_line(ErrorKind::kParse, line_no, "unparsable prediction");
    rows.push_back({std::string(trim(fields[idx[0]])), std::string(trim(fields[idx[1]])), *value});
  }
  return rows;
}

void write_prediction_file(std::ostream& out, std::span<const ExternalPrediction> rows) {
  out << "user,item,prediction\n";
  for (const auto& r : rows) out << r.user << ',' << r.item << ',' << format_double(r.prediction) << '\n';
}

std::vector<ExternalTopK> parse_topk_file(std::istream& in) {
  std::string line;
  if (!getline_stripped(in, line)) throw Error(ErrorKind::kSchema, "user");
  const std::string header_line(strip_bom(line));
  const auto header = split(header_line, ",");
  const std::vector<std::string> required{"user", "rank", "item"};
  const auto idx = locate_columns(header, required);
  std::vector<ExternalTopK> rows;
  std::size_t line_no = 1;
  while (getline_stripped(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ",");
    if (fields.size() != header.size())
      throw Error::at_line(ErrorKind::kMalformedLine, line_no, "wrong field count");
    const auto rank = parse_number<std::size_t>(fields[idx[1]]);
    if (!rank || *rank == 0) throw Error::at_line(ErrorKind::kParse, line_no, "unparsable rank");
    rows.push_back({std::string(trim(fields[idx[0]])), *rank, std::string(trim(fields[idx[2]]))});
  }
  return rows;
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace logitmat
