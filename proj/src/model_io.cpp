#include "logitmat/model_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "logitmat/data.hpp"
#include "logitmat/error.hpp"

namespace logitmat {

namespace {

constexpr std::array<char, 8> kMagic{'L', 'O', 'G', 'I', 'T', 'M', 'A', 'T'};
constexpr std::uint32_t kKindLogitMat = 1;
constexpr std::uint32_t kKindClassicMf = 2;

static_assert(std::endian::native == std::endian::little,
              "model files are written in native little-endian layout");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof value))
    throw Error(ErrorKind::kTruncated, "model file ends inside the header or a block");
  return value;
}

void put_matrix(std::ostream& out, const Matrix& m) {
  put<std::uint64_t>(out, m.rows());
  put<std::uint64_t>(out, m.cols());
  const auto values = m.values();
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

Matrix get_matrix(std::istream& in, std::uint64_t rows, std::uint64_t cols, const char* name) {
  const auto file_rows = get<std::uint64_t>(in);
  const auto file_cols = get<std::uint64_t>(in);
  if (file_rows != rows || file_cols != cols)
    throw Error(ErrorKind::kShapeMismatch,
                std::string(name) + " block is " + std::to_string(file_rows) + "x" +
                    std::to_string(file_cols) + ", header declares " + std::to_string(rows) + "x" +
                    std::to_string(cols));
  // Refuse to allocate more than the stream can still supply.
  const auto here = in.tellg();
  if (here != std::streampos(-1)) {
    in.seekg(0, std::ios::end);
    const auto end = in.tellg();
    in.seekg(here);
    const auto available = static_cast<std::uint64_t>(end - here);
    if (cols != 0 && rows > available / sizeof(double) / cols)
      throw Error(ErrorKind::kTruncated, std::string(name) + " block is truncated");
  }
  Matrix m(rows, cols);
  auto values = m.values();
  const auto bytes = static_cast<std::streamsize>(values.size() * sizeof(double));
  if (!in.read(reinterpret_cast<char*>(values.data()), bytes))
    throw Error(ErrorKind::kTruncated, std::string(name) + " block is truncated");
  return m;
}

}  // namespace

void write_model(std::ostream& out, const AnyModel& model) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kModelFormatVersion);
  if (const auto* m = std::get_if<FactorModel>(&model)) {
    m->validate();
    put<std::uint32_t>(out, kKindLogitMat);
    put<std::uint64_t>(out, m->n_users());
    put<std::uint64_t>(out, m->n_items());
    put<std::uint64_t>(out, m->latent_dim());
    put<std::uint64_t>(out, m->coeff_dim());
    put<std::int32_t>(out, m->r_max);
    put_matrix(out, m->user_factors);
    put_matrix(out, m->item_factors);
    put_matrix(out, m->user_coeffs);
    put_matrix(out, m->item_coeffs);
  } else {
    const auto& mf = std::get<MfModel>(model);
    mf.validate();
    put<std::uint32_t>(out, kKindClassicMf);
    put<std::uint64_t>(out, mf.n_users());
    put<std::uint64_t>(out, mf.n_items());
    put<std::uint64_t>(out, mf.latent_dim());
    put<std::uint64_t>(out, 0);
    put<std::int32_t>(out, mf.r_max);
    put_matrix(out, mf.user_factors);
    put_matrix(out, mf.item_factors);
  }
  if (!out) throw Error(ErrorKind::kIo, "failed writing model");
}

AnyModel read_model(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()))
    throw Error(ErrorKind::kTruncated, "model file shorter than its magic string");
  if (magic != kMagic) throw Error(ErrorKind::kFormat, "not a model file (bad magic)");
  const auto version = get<std::uint32_t>(in);
  if (version != kModelFormatVersion)
    throw Error(ErrorKind::kVersionMismatch, "model format version " + std::to_string(version) +
                                                 ", expected " +
                                                 std::to_string(kModelFormatVersion));
  const auto kind = get<std::uint32_t>(in);
  const auto n_users = get<std::uint64_t>(in);
  const auto n_items = get<std::uint64_t>(in);
  const auto latent_dim = get<std::uint64_t>(in);
  const auto coeff_dim = get<std::uint64_t>(in);
  const auto r_max = get<std::int32_t>(in);

  AnyModel model;
  if (kind == kKindLogitMat) {
    FactorModel m;
    m.r_max = r_max;
    m.user_factors = get_matrix(in, n_users, latent_dim, "user factor");
    m.item_factors = get_matrix(in, n_items, latent_dim, "item factor");
    m.user_coeffs = get_matrix(in, n_users, coeff_dim, "user coefficient");
    m.item_coeffs = get_matrix(in, n_items, coeff_dim, "item coefficient");
    m.validate();
    model = std::move(m);
  } else if (kind == kKindClassicMf) {
    if (coeff_dim != 0)
      throw Error(ErrorKind::kShapeMismatch, "classic MF model declares coefficient columns");
    MfModel m;
    m.r_max = r_max;
    m.user_factors = get_matrix(in, n_users, latent_dim, "user factor");
    m.item_factors = get_matrix(in, n_items, latent_dim, "item factor");
    m.validate();
    model = std::move(m);
  } else {
    throw Error(ErrorKind::kFormat, "unknown model kind " + std::to_string(kind));
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw Error(ErrorKind::kFormat, "trailing bytes after the last matrix block");
  return model;
}

void persist_model(const AnyModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  write_model(out, model);
}

AnyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return read_model(in);
}

void export_model_csv(std::ostream& out, const AnyModel& model) {
  out << "matrix,row,col,value\n";
  auto dump = [&out](const char* name, const Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c)
        out << name << ',' << r << ',' << c << ',' << format_double(m(r, c)) << '\n';
    }
  };
  if (const auto* m = std::get_if<FactorModel>(&model)) {
    dump("U", m->user_factors);
    dump("V", m->item_factors);
    dump("W", m->user_coeffs);
    dump("Z", m->item_coeffs);
  } else {
    const auto& mf = std::get<MfModel>(model);
    dump("U", mf.user_factors);
    dump("V", mf.item_factors);
  }
}

}  // namespace logitmat
