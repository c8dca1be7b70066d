#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "logitmat/error.hpp"
#include "logitmat/model_io.hpp"
#include "logitmat/trainer.hpp"

using namespace logitmat;

namespace {

constexpr std::size_t kFirstBlock = 8 + 4 + 4 + 4 * 8 + 4;

FactorModel logit_fixture() {
  TrainConfig cfg;
  cfg.latent_dim = 2;
  cfg.coeff_dim = 3;
  Rng rng(17);
  FactorModel m = init_model(3, 2, cfg, rng);
  m.user_factors(0, 0) = -0.0;
  m.item_factors(1, 1) = 1e-310;
  return m;
}

MfModel mf_fixture() {
  TrainConfig cfg;
  cfg.latent_dim = 2;
  Rng rng(18);
  return init_mf_model(3, 2, cfg, rng);
}

std::string bytes_of(const AnyModel& m) {
  std::ostringstream out(std::ios::binary);
  write_model(out, m);
  return out.str();
}

ErrorKind read_error(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  try {
    read_model(in);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("read_model accepted a damaged file");
  return ErrorKind::kInvalidArgument;
}

template <class T>
void poke(std::string& bytes, std::size_t offset, T value) {
  std::memcpy(bytes.data() + offset, &value, sizeof value);
}

}  // namespace

TEST_CASE("bitwise round trip") {
  for (const AnyModel& original : {AnyModel(logit_fixture()), AnyModel(mf_fixture())}) {
    const std::string bytes = bytes_of(original);
    std::istringstream in(bytes, std::ios::binary);
    const AnyModel back = read_model(in);
    REQUIRE(back.index() == original.index());
    CHECK(bytes_of(back) == bytes);
    CHECK(back == original);
  }
  const FactorModel m = logit_fixture();
  const auto back = std::get<FactorModel>([&] {
    std::istringstream in(bytes_of(m), std::ios::binary);
    return read_model(in);
  }());
  CHECK(std::signbit(back.user_factors(0, 0)));
  CHECK(back.item_factors(1, 1) == 1e-310);
}

TEST_CASE("damaged files") {
  const std::string good = bytes_of(logit_fixture());

  SUBCASE("truncation at every length") {
    for (std::size_t n = 0; n < good.size(); ++n) CHECK(read_error(good.substr(0, n)) == ErrorKind::kTruncated);
  }
  SUBCASE("bad magic") {
    std::string b = good;
    b[0] = 'X';
    CHECK(read_error(b) == ErrorKind::kFormat);
  }
  SUBCASE("version") {
    std::string b = good;
    poke<std::uint32_t>(b, 8, kModelFormatVersion + 1);
    CHECK(read_error(b) == ErrorKind::kVersionMismatch);
  }
  SUBCASE("unknown kind") {
    std::string b = good;
    poke<std::uint32_t>(b, 12, 9);
    CHECK(read_error(b) == ErrorKind::kFormat);
  }
  SUBCASE("block rows disagree with the header") {
    std::string b = good;
    poke<std::uint64_t>(b, kFirstBlock, 4);
    CHECK(read_error(b) == ErrorKind::kShapeMismatch);
  }
  SUBCASE("huge declared sizes do not allocate") {
    std::string b = good;
    poke<std::uint64_t>(b, 16, std::uint64_t{1} << 40);
    poke<std::uint64_t>(b, kFirstBlock, std::uint64_t{1} << 40);
    CHECK(read_error(b) == ErrorKind::kTruncated);
  }
  SUBCASE("trailing bytes") {
    CHECK(read_error(good + "x") == ErrorKind::kFormat);
  }
}

TEST_CASE("files and csv export") {
  const auto dir = std::filesystem::temp_directory_path() / "logitmat_model_io_test";
  std::filesystem::create_directories(dir);
  const FactorModel m = logit_fixture();
  persist_model(m, dir / "m.bin");
  CHECK(std::get<FactorModel>(load_model(dir / "m.bin")) == m);
  CHECK_THROWS_AS(load_model(dir / "absent.bin"), Error);
  std::filesystem::remove_all(dir);

  std::ostringstream csv;
  export_model_csv(csv, m);
  const std::string text = csv.str();
  CHECK(text.rfind("matrix,row,col,value\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3 * 2 + 2 * 2 + 3 * 3 + 2 * 3);
}
