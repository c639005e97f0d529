#include "gpdiag/dataset.hpp"

#include "gpdiag/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace gpdiag {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::schema: return "schema error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::validation: return "validation error";
    case ErrorKind::dimension: return "dimension error";
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::numerical: return "numerical error";
    case ErrorKind::rank: return "rank error";
    case ErrorKind::precondition: return "precondition error";
    case ErrorKind::optimization: return "optimization error";
    case ErrorKind::degenerate: return "degenerate-column error";
    case ErrorKind::domain: return "domain error";
  }
  return "error";
}

std::size_t GridTag::size() const {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

std::optional<double> GridTag::uniform_spacing() const {
  if (spacing.empty()) return std::nullopt;
  for (double h : spacing) {
    if (std::abs(h - spacing.front()) > 1e-9 * std::max(1.0, std::abs(h))) return std::nullopt;
  }
  return spacing.front();
}

std::optional<GridTag> detect_grid(const Eigen::MatrixXd& coords, double tol) {
  const auto n = static_cast<std::size_t>(coords.rows());
  const int dim = static_cast<int>(coords.cols());
  if (n < 2 || dim < 1 || dim > 2) return std::nullopt;

  GridTag tag;
  std::vector<std::vector<long>> index(static_cast<std::size_t>(dim), std::vector<long>(n));
  for (int a = 0; a < dim; ++a) {
    std::vector<double> v(coords.col(a).data(), coords.col(a).data() + n);
    std::sort(v.begin(), v.end());
    const double lo = v.front();
    const double hi = v.back();
    const double scale = std::max(1.0, std::abs(hi - lo));
    std::vector<double> distinct{v.front()};
    for (double x : v) {
      if (x - distinct.back() > tol * scale) distinct.push_back(x);
    }
    const auto m = static_cast<long>(distinct.size());
    if (m < 2) return std::nullopt;
    const double h = (hi - lo) / static_cast<double>(m - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double k = (coords(static_cast<Eigen::Index>(i), a) - lo) / h;
      const double r = std::round(k);
      if (std::abs(k - r) > tol) return std::nullopt;
      index[static_cast<std::size_t>(a)][i] = static_cast<long>(r);
    }
    tag.dims.push_back(static_cast<int>(m));
    tag.origin.push_back(lo);
    tag.spacing.push_back(h);
  }
  if (tag.size() != n) return std::nullopt;

  tag.lattice_row.resize(n);
  std::vector<char> seen(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t row = 0;
    for (int a = 0; a < dim; ++a) {
      row = row * static_cast<std::size_t>(tag.dims[static_cast<std::size_t>(a)]) +
            static_cast<std::size_t>(index[static_cast<std::size_t>(a)][i]);
    }
    if (seen[row]) return std::nullopt;
    seen[row] = 1;
    tag.lattice_row[i] = row;
  }
  return tag;
}

Dataset Dataset::create(Eigen::MatrixXd coords, Eigen::VectorXd y, std::vector<Covariate> covariates,
                        std::vector<std::string> location_names, std::string outcome_name) {
  const auto n = y.size();
  if (coords.cols() < 1 || coords.cols() > 2) {
    fail(ErrorKind::validation, "locations must be 1- or 2-dimensional");
  }
  if (coords.rows() != n) fail(ErrorKind::validation, "location count does not match outcome length");
  if (n < 1) fail(ErrorKind::validation, "dataset is empty");
  if (!coords.allFinite()) fail(ErrorKind::validation, "non-finite location coordinate");
  if (!y.allFinite()) fail(ErrorKind::validation, "non-finite value in outcome");
  std::set<std::string> names;
  for (const auto& c : covariates) {
    if (c.values.size() != n) {
      fail(ErrorKind::validation, "covariate '" + c.name + "' length does not match outcome length");
    }
    if (!c.values.allFinite()) fail(ErrorKind::validation, "non-finite value in covariate '" + c.name + "'");
    if (!names.insert(c.name).second) fail(ErrorKind::validation, "duplicate covariate name '" + c.name + "'");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto row_less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index k = 0; k < coords.cols(); ++k) {
      if (coords(a, k) != coords(b, k)) return coords(a, k) < coords(b, k);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), row_less);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!row_less(order[i - 1], order[i])) {
      fail(ErrorKind::validation, "duplicate location at rows " + std::to_string(order[i - 1] + 1) + " and " +
                                      std::to_string(order[i] + 1));
    }
  }

  if (location_names.empty()) {
    location_names = coords.cols() == 1 ? std::vector<std::string>{"s1"} : std::vector<std::string>{"s1", "s2"};
  }
  if (static_cast<Eigen::Index>(location_names.size()) != coords.cols()) {
    fail(ErrorKind::validation, "location name count does not match dimension");
  }

  Dataset d;
  d.grid_ = detect_grid(coords);
  d.coords_ = std::move(coords);
  d.y_ = std::move(y);
  d.covariates_ = std::move(covariates);
  d.location_names_ = std::move(location_names);
  d.outcome_name_ = std::move(outcome_name);
  return d;
}

Location Dataset::location(std::size_t i) const {
  Location loc;
  loc.dim = dim();
  for (int a = 0; a < dim(); ++a) loc.coords[static_cast<std::size_t>(a)] = coords_(static_cast<Eigen::Index>(i), a);
  return loc;
}

const Eigen::VectorXd& Dataset::covariate(const std::string& name) const {
  for (const auto& c : covariates_) {
    if (c.name == name) return c.values;
  }
  fail(ErrorKind::schema, "unknown covariate '" + name + "'");
}

bool Dataset::has_covariate(const std::string& name) const {
  return std::any_of(covariates_.begin(), covariates_.end(), [&](const Covariate& c) { return c.name == name; });
}

double Dataset::extent() const {
  double best = 0.0;
  const auto n = coords_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) best = std::max(best, (coords_.row(i) - coords_.row(j)).squaredNorm());
  }
  return std::sqrt(best);
}

Eigen::MatrixXd Dataset::distance_matrix() const {
  const auto n = coords_.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    d(j, j) = 0.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      d(i, j) = d(j, i) = (coords_.row(i) - coords_.row(j)).norm();
    }
  }
  return d;
}

Dataset Dataset::with_outcome(Eigen::VectorXd y) const {
  return create(coords_, std::move(y), covariates_, location_names_, outcome_name_);
}

Dataset Dataset::with_covariate(const std::string& name, Eigen::VectorXd values) const {
  auto covs = covariates_;
  bool replaced = false;
  for (auto& c : covs) {
    if (c.name == name) {
      c.values = values;
      replaced = true;
    }
  }
  if (!replaced) covs.push_back({name, std::move(values)});
  return create(coords_, y_, std::move(covs), location_names_, outcome_name_);
}

Eigen::VectorXd Dataset::to_lattice_order(const Eigen::VectorXd& values) const {
  if (!grid_) fail(ErrorKind::precondition, "dataset is not on a regular grid");
  if (values.size() != y_.size()) fail(ErrorKind::dimension, "vector length does not match dataset size");
  Eigen::VectorXd out(values.size());
  for (std::size_t i = 0; i < grid_->lattice_row.size(); ++i) {
    out(static_cast<Eigen::Index>(grid_->lattice_row[i])) = values(static_cast<Eigen::Index>(i));
  }
  return out;
}

Eigen::VectorXd Dataset::from_lattice_order(const Eigen::VectorXd& values) const {
  if (!grid_) fail(ErrorKind::precondition, "dataset is not on a regular grid");
  if (values.size() != y_.size()) fail(ErrorKind::dimension, "vector length does not match dataset size");
  Eigen::VectorXd out(values.size());
  for (std::size_t i = 0; i < grid_->lattice_row.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = values(static_cast<Eigen::Index>(grid_->lattice_row[i]));
  }
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  out.push_back(cell);
  for (auto& c : out) {
    const auto b = c.find_first_not_of(" \t");
    const auto e = c.find_last_not_of(" \t");
    c = b == std::string::npos ? std::string{} : c.substr(b, e - b + 1);
  }
  return out;
}

double parse_number(const std::string& cell, std::size_t row, const std::string& column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw ParseError(row, "row " + std::to_string(row) + ", column '" + column + "': cannot parse '" + cell +
                              "' as a finite number");
  }
  return value;
}

}  // namespace

Dataset parse_csv(const std::string& text, const Schema& schema) {
  if (schema.locations.empty() || schema.locations.size() > 2) {
    fail(ErrorKind::schema, "schema must name one or two location columns");
  }
  if (schema.outcome.empty()) fail(ErrorKind::schema, "schema must name an outcome column");

  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::parse, "empty CSV input");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);  // BOM
  const auto header = split_line(line);

  auto column_of = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorKind::schema, "column '" + name + "' not found in CSV header");
    return static_cast<std::size_t>(it - header.begin());
  };

  std::vector<std::size_t> loc_cols;
  for (const auto& n : schema.locations) loc_cols.push_back(column_of(n));
  const std::size_t y_col = column_of(schema.outcome);
  std::vector<std::string> cov_names;
  if (schema.covariates) {
    cov_names = *schema.covariates;
  } else {
    for (const auto& h : header) {
      const bool used = h == schema.outcome ||
                        std::find(schema.locations.begin(), schema.locations.end(), h) != schema.locations.end();
      if (!used && !h.empty()) cov_names.push_back(h);
    }
  }
  std::vector<std::size_t> cov_cols;
  for (const auto& n : cov_names) cov_cols.push_back(column_of(n));

  std::vector<std::vector<double>> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw ParseError(row, "row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                " fields, header has " + std::to_string(header.size()));
    }
    std::vector<double> r;
    for (auto c : loc_cols) r.push_back(parse_number(cells[c], row, header[c]));
    r.push_back(parse_number(cells[y_col], row, header[y_col]));
    for (auto c : cov_cols) r.push_back(parse_number(cells[c], row, header[c]));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) fail(ErrorKind::validation, "CSV has no data rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(loc_cols.size());
  Eigen::MatrixXd coords(n, d);
  Eigen::VectorXd y(n);
  std::vector<Covariate> covs(cov_names.size());
  for (std::size_t k = 0; k < cov_names.size(); ++k) covs[k] = {cov_names[k], Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (Eigen::Index a = 0; a < d; ++a) coords(i, a) = r[static_cast<std::size_t>(a)];
    y(i) = r[static_cast<std::size_t>(d)];
    for (std::size_t k = 0; k < covs.size(); ++k) covs[k].values(i) = r[static_cast<std::size_t>(d) + 1 + k];
  }
  return Dataset::create(std::move(coords), std::move(y), std::move(covs), schema.locations, schema.outcome);
}

Dataset ingest_csv(const std::string& path, const Schema& schema) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::schema, "cannot open CSV file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str(), schema);
}

namespace {

std::string format_number(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);  // shortest round-trip form
  return std::string(buf, ptr);
}

}  // namespace

std::string to_csv(const Dataset& data) {
  std::ostringstream out;
  std::vector<std::string> header = data.location_names();
  header.push_back(data.outcome_name());
  for (const auto& c : data.covariates()) header.push_back(c.name);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (int a = 0; a < data.dim(); ++a) out << format_number(data.coords()(r, a)) << ',';
    out << format_number(data.y()(r));
    for (const auto& c : data.covariates()) out << ',' << format_number(c.values(r));
    out << '\n';
  }
  return out.str();
}

void export_csv(const Dataset& data, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::validation, "cannot write CSV file '" + path + "'");
  f << to_csv(data);
}

DesignMatrix make_design(std::vector<std::string> names, Eigen::MatrixXd X) {
  if (X.cols() < 1 || static_cast<Eigen::Index>(names.size()) != X.cols()) {
    fail(ErrorKind::dimension, "design names do not match design columns");
  }
  if (!(X.col(0).array() == 1.0).all()) fail(ErrorKind::validation, "first design column must be all ones");
  if (X.rows() < X.cols()) fail(ErrorKind::rank, "design has more columns than observations");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-8 * sv(0)) {
    fail(ErrorKind::rank, "design matrix is rank deficient (columns are linearly dependent)");
  }
  return {std::move(names), std::move(X)};
}

DesignMatrix make_design(const Dataset& data, const std::vector<std::string>& covariates) {
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(covariates.size()) + 1);
  X.col(0).setOnes();
  std::vector<std::string> names{kInterceptName};
  for (std::size_t k = 0; k < covariates.size(); ++k) {
    X.col(static_cast<Eigen::Index>(k) + 1) = data.covariate(covariates[k]);
    names.push_back(covariates[k]);
  }
  return make_design(std::move(names), std::move(X));
}

Standardized standardize(const Eigen::VectorXd& column) {
  const auto n = column.size();
  if (n < 2) fail(ErrorKind::degenerate, "cannot standardize fewer than two values");
  const double mean = column.mean();
  const double sd = std::sqrt((column.array() - mean).square().sum() / static_cast<double>(n - 1));
  if (!(sd > 1e-14 * std::max(1.0, std::abs(mean)))) fail(ErrorKind::degenerate, "column is constant");
  return {(column.array() - mean) / sd, mean, sd};
}

Eigen::VectorXd destandardize(const Standardized& s) { return (s.values.array() * s.sd + s.mean).matrix(); }

}  // namespace gpdiag
