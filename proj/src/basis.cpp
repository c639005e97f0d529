#include "gpdiag/basis.hpp"

#include "gpdiag/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>

namespace gpdiag {

namespace {

int signed_index(int m, int M) { return m <= M / 2 ? m : m - M; }

BasisColumn make_column(int m1, int m2, int M1, int M2, bool sine, int block) {
  BasisColumn c;
  c.m = {m1, m2};
  c.k = {signed_index(m1, M1), M2 > 1 ? signed_index(m2, M2) : 0};
  c.omega = {static_cast<double>(c.k[0]) / M1, M2 > 1 ? static_cast<double>(c.k[1]) / M2 : 0.0};
  c.sine = sine;
  c.block = block;
  return c;
}

// A frequency that is its own conjugate carries a single real coefficient and
// enters Z without the factor 2.
bool self_conjugate(const BasisColumn& c, int M1, int M2) {
  const bool a = c.m[0] == 0 || 2 * c.m[0] == M1;
  const bool b = M2 == 1 || c.m[1] == 0 || 2 * c.m[1] == M2;
  return a && b;
}

void check_even(int M, const char* what) {
  if (M < 4 || M % 2 != 0) {
    fail(ErrorKind::dimension, std::string(what) + " must be an even integer >= 4 (got " + std::to_string(M) + ")");
  }
}

// Z entry for lattice coordinates (s1, s2). The phase k1 s1 / M1 + k2 s2 / M2 is
// reduced exactly in integers before scaling by 2 pi.
double basis_entry(const BasisColumn& c, int M1, int M2, long s1, long s2) {
  const long long period = static_cast<long long>(M1) * M2;
  long long num = static_cast<long long>(c.k[0]) * s1 * M2 + static_cast<long long>(c.k[1]) * s2 * M1;
  num %= period;
  if (num < 0) num += period;
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(num) / static_cast<double>(period);
  const double scale = self_conjugate(c, M1, M2) ? 1.0 : 2.0;
  return c.sine ? -scale * std::sin(angle) : scale * std::cos(angle);
}

bool canonical_less(const BasisColumn& a, const BasisColumn& b, long long ka, long long kb) {
  if (ka != kb) return ka < kb;
  if (a.omega[0] != b.omega[0]) return a.omega[0] < b.omega[0];
  if (a.omega[1] != b.omega[1]) return a.omega[1] < b.omega[1];
  return !a.sine && b.sine;
}

long long key_of(const BasisColumn& c, int M1, int M2) {
  const long long a = static_cast<long long>(c.k[0]) * M2;
  const long long b = static_cast<long long>(c.k[1]) * M1;
  return a * a + b * b;
}

std::vector<BasisColumn> columns_1d(int M) {
  std::vector<BasisColumn> cols;
  for (int m = 1; m < M / 2; ++m) {
    cols.push_back(make_column(m, 0, M, 1, false, 0));
    cols.push_back(make_column(m, 0, M, 1, true, 0));
  }
  cols.push_back(make_column(M / 2, 0, M, 1, false, 0));
  return cols;
}

std::vector<BasisColumn> columns_2d(int M1, int M2, std::vector<int>& widths) {
  std::vector<BasisColumn> cols;
  widths.assign(7, 0);
  auto pair = [&](int m1, int m2, int block) {
    cols.push_back(make_column(m1, m2, M1, M2, false, block));
    cols.push_back(make_column(m1, m2, M1, M2, true, block));
    widths[static_cast<std::size_t>(block - 1)] += 2;
  };
  for (int m1 = 1; m1 <= M1 / 2 - 1; ++m1)
    for (int m2 = 1; m2 <= M2 / 2; ++m2) pair(m1, m2, 1);
  for (int m1 = 1; m1 <= M1 / 2; ++m1)
    for (int m2 = M2 / 2 + 1; m2 <= M2 - 1; ++m2) pair(m1, m2, 2);
  for (int m2 = 1; m2 <= M2 / 2 - 1; ++m2) pair(0, m2, 3);
  for (int m1 = 1; m1 <= M1 / 2 - 1; ++m1) pair(m1, 0, 4);
  cols.push_back(make_column(0, M2 / 2, M1, M2, false, 5));
  cols.push_back(make_column(M1 / 2, 0, M1, M2, false, 6));
  cols.push_back(make_column(M1 / 2, M2 / 2, M1, M2, false, 7));
  widths[4] = widths[5] = widths[6] = 1;
  return cols;
}

std::vector<Eigen::Index> key_order(const std::vector<BasisColumn>& cols, int M1, int M2) {
  std::vector<Eigen::Index> order(cols.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const auto& ca = cols[static_cast<std::size_t>(a)];
    const auto& cb = cols[static_cast<std::size_t>(b)];
    return canonical_less(ca, cb, key_of(ca, M1, M2), key_of(cb, M1, M2));
  });
  return order;
}

Eigen::MatrixXd fill_Z(const std::vector<BasisColumn>& cols, int M1, int M2) {
  const Eigen::Index rows = static_cast<Eigen::Index>(M1) * M2;
  Eigen::MatrixXd Z(rows, static_cast<Eigen::Index>(cols.size()));
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    const auto& c = cols[static_cast<std::size_t>(j)];
    for (long s1 = 1; s1 <= M1; ++s1) {
      for (long s2 = 1; s2 <= M2; ++s2) {
        Z((s1 - 1) * M2 + (s2 - 1), j) = basis_entry(c, M1, M2, s1, s2);
      }
    }
  }
  return Z;
}

std::pair<int, int> grid_pair(const std::vector<int>& dims) {
  return dims.size() == 1 ? std::pair{dims[0], 1} : std::pair{dims[0], dims[1]};
}

}  // namespace

std::string SpectralBasis::id() const {
  return dims_.size() == 1 ? "spectral-1d-" + std::to_string(dims_[0])
                           : "spectral-2d-" + std::to_string(dims_[0]) + "x" + std::to_string(dims_[1]);
}

long long SpectralBasis::omega_sq_key(Eigen::Index j) const {
  const auto [M1, M2] = grid_pair(dims_);
  return key_of(columns_[static_cast<std::size_t>(j)], M1, M2);
}

double SpectralBasis::omega_sq(Eigen::Index j) const {
  const auto& w = columns_[static_cast<std::size_t>(j)].omega;
  return w[0] * w[0] + w[1] * w[1];
}

SpectralBasis SpectralBasis::permuted(const std::vector<Eigen::Index>& order) const {
  if (static_cast<Eigen::Index>(order.size()) != cols()) fail(ErrorKind::dimension, "permutation length mismatch");
  SpectralBasis out = *this;
  for (std::size_t j = 0; j < order.size(); ++j) {
    out.Z_.col(static_cast<Eigen::Index>(j)) = Z_.col(order[j]);
    out.ztz_(static_cast<Eigen::Index>(j)) = ztz_(order[j]);
    out.columns_[j] = columns_[static_cast<std::size_t>(order[j])];
  }
  return out;
}

SpectralBasis build_basis_1d(int M) {
  check_even(M, "series length M");
  SpectralBasis b;
  b.dims_ = {M};
  b.columns_ = columns_1d(M);
  b.block_widths_ = {M - 1};
  b.Z_ = fill_Z(b.columns_, M, 1);
  b.ztz_.resize(M - 1);
  for (int j = 0; j < M - 1; ++j) b.ztz_(j) = self_conjugate(b.columns_[static_cast<std::size_t>(j)], M, 1) ? M : 2.0 * M;
  return b;
}

SpectralBasis build_basis_2d(int M1, int M2) {
  check_even(M1, "grid dimension M1");
  check_even(M2, "grid dimension M2");
  SpectralBasis b;
  b.dims_ = {M1, M2};
  auto cols = columns_2d(M1, M2, b.block_widths_);
  const auto order = key_order(cols, M1, M2);
  b.columns_.reserve(cols.size());
  for (auto j : order) b.columns_.push_back(cols[static_cast<std::size_t>(j)]);
  b.Z_ = fill_Z(b.columns_, M1, M2);
  const double total = static_cast<double>(M1) * M2;
  b.ztz_.resize(static_cast<Eigen::Index>(b.columns_.size()));
  for (std::size_t j = 0; j < b.columns_.size(); ++j) {
    b.ztz_(static_cast<Eigen::Index>(j)) = self_conjugate(b.columns_[j], M1, M2) ? total : 2.0 * total;
  }
  return b;
}

SpectralBasis build_basis(const GridTag& grid) {
  return grid.dims.size() == 1 ? build_basis_1d(grid.dims[0]) : build_basis_2d(grid.dims[0], grid.dims[1]);
}

std::vector<Eigen::Index> canonical_order(const SpectralBasis& basis, const SpectralDensityFamily& density) {
  const auto [M1, M2] = grid_pair(basis.dims());
  const auto order = key_order(basis.columns(), M1, M2);
  for (double rho : {1.0, 5.0, 20.0}) {
    double prev = std::numeric_limits<double>::infinity();
    for (auto j : order) {
      const double a = density(basis.columns()[static_cast<std::size_t>(j)].omega, rho);
      if (!(a > 0.0) || a > prev * (1.0 + 1e-12)) {
        fail(ErrorKind::parameter, "spectral density is not radially non-increasing at rho=" + std::to_string(rho));
      }
      prev = a;
    }
  }
  return order;
}

SpectralBasis order_columns(const SpectralBasis& basis, const SpectralDensityFamily& density) {
  return basis.permuted(canonical_order(basis, density));
}

SpectralProjection project(const SpectralBasis& basis, const Eigen::VectorXd& data) {
  if (data.size() != basis.rows()) {
    fail(ErrorKind::dimension, "data length " + std::to_string(data.size()) + " does not match basis rows " +
                                   std::to_string(basis.rows()));
  }
  SpectralProjection p;
  p.v = (basis.Z().transpose() * data).cwiseQuotient(basis.ztz_diag().cwiseSqrt());
  p.v_sq = p.v.array().square();
  p.basis_id = basis.id();
  return p;
}

SpectralProjection project(const SpectralBasis& basis, const Dataset& grid_data, const Eigen::VectorXd& values) {
  return project(basis, grid_data.to_lattice_order(values));
}

namespace {

constexpr char kMagic[4] = {'G', 'P', 'Z', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ofstream& f, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

}  // namespace

void save_basis_cache(const SpectralBasis& basis, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::validation, "cannot write basis cache '" + path + "'");
  f.write(kMagic, 4);
  put_u32(f, kVersion);
  put_u32(f, static_cast<std::uint32_t>(basis.dims()[0]));
  put_u32(f, basis.dim() == 2 ? static_cast<std::uint32_t>(basis.dims()[1]) : 0u);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = basis.Z();
  static_assert(sizeof(double) == 8);
  f.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * 8));
}

SpectralBasis basis_from_cache(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::validation, "cannot open basis cache '" + path + "'");
  unsigned char header[16];
  if (!f.read(reinterpret_cast<char*>(header), 16) || std::memcmp(header, kMagic, 4) != 0 ||
      get_u32(header + 4) != kVersion) {
    fail(ErrorKind::validation, "basis cache '" + path + "' has an invalid header");
  }
  const int M1 = static_cast<int>(get_u32(header + 8));
  const int M2raw = static_cast<int>(get_u32(header + 12));
  check_even(M1, "cached M1");
  if (M2raw != 0) check_even(M2raw, "cached M2");
  const int M2 = M2raw == 0 ? 1 : M2raw;

  SpectralBasis b;
  if (M2raw == 0) {
    b.dims_ = {M1};
    b.columns_ = columns_1d(M1);
    b.block_widths_ = {M1 - 1};
  } else {
    b.dims_ = {M1, M2};
    auto cols = columns_2d(M1, M2, b.block_widths_);
    for (auto j : key_order(cols, M1, M2)) b.columns_.push_back(cols[static_cast<std::size_t>(j)]);
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(M1) * M2;
  const auto ncol = static_cast<Eigen::Index>(b.columns_.size());
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, ncol);
  if (!f.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * 8))) {
    fail(ErrorKind::validation, "basis cache '" + path + "' is truncated");
  }
  b.Z_ = rm;
  b.ztz_.resize(ncol);
  for (Eigen::Index j = 0; j < ncol; ++j) {
    b.ztz_(j) = (self_conjugate(b.columns_[static_cast<std::size_t>(j)], M1, M2) ? 1.0 : 2.0) * static_cast<double>(rows);
  }
  return b;
}

SpectralBasis load_or_build_basis(const std::string& dir, const std::vector<int>& dims) {
  if (dims.empty() || dims.size() > 2) fail(ErrorKind::dimension, "basis dims must have 1 or 2 entries");
  const std::string name = dims.size() == 1 ? "basis_" + std::to_string(dims[0]) + ".bin"
                                            : "basis_" + std::to_string(dims[0]) + "x" + std::to_string(dims[1]) + ".bin";
  const auto path = std::filesystem::path(dir) / name;
  if (std::filesystem::exists(path)) return basis_from_cache(path.string());
  auto basis = dims.size() == 1 ? build_basis_1d(dims[0]) : build_basis_2d(dims[0], dims[1]);
  std::filesystem::create_directories(dir);
  save_basis_cache(basis, path.string());
  return basis;
}

}  // namespace gpdiag
