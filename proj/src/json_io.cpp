#include "gpdiag/json_io.hpp"

#include "gpdiag/errors.hpp"

#include <cmath>

namespace gpdiag {

namespace {

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Eigen::VectorXd vec_from(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

// Non-finite values have no JSON spelling; they are written as strings.
json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

json triple(const Eigen::Vector3d& v) { return {{"sigma_s2", v(0)}, {"sigma_e2", v(1)}, {"rho", v(2)}}; }

}  // namespace

json nu_to_json(Smoothness nu) {
  if (nu == Smoothness::infinite) return "inf";
  return nu_value(nu);
}

Smoothness nu_from_json(const json& j) {
  if (j.is_string()) return smoothness_from_string(j.get<std::string>());
  return smoothness_from_value(j.get<double>());
}

json to_json(const VarianceParams& p) {
  return {{"sigma_s2", p.sigma_s2}, {"sigma_e2", p.sigma_e2}, {"rho", p.rho}};
}

json to_json(const FitResult& f) {
  json j;
  j["method"] = to_string(f.method);
  j["nu"] = nu_to_json(f.nu);
  j["params"] = to_json(f.params);
  if (f.rho_lattice) j["rho_lattice"] = *f.rho_lattice;
  j["objective"] = f.objective;
  json beta = json::array();
  for (std::size_t k = 0; k < f.beta.names.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    beta.push_back({{"name", f.beta.names[k]},
                    {"estimate", f.beta.beta(i)},
                    {"se", f.beta.se(i)},
                    {"p", f.beta.p_value(i)}});
  }
  j["beta"] = beta;
  j["v_sq"] = f.v_sq ? vec(*f.v_sq) : json(nullptr);
  j["basis_id"] = f.basis_id;
  j["converged"] = f.converged;
  j["n_starts"] = f.n_starts;
  j["warnings"] = f.warnings;
  json trace = json::array();
  for (const auto& s : f.trace) {
    trace.push_back({{"start", vec(s.start)},
                     {"end", vec(s.end)},
                     {"objective", number(s.value)},
                     {"iterations", s.iterations},
                     {"evaluations", s.evaluations},
                     {"converged", s.converged},
                     {"polish", s.polish}});
  }
  j["trace"] = trace;
  return j;
}

FitResult fit_from_json(const json& j) {
  try {
    FitResult f;
    f.method = method_from_string(j.at("method").get<std::string>());
    f.nu = nu_from_json(j.at("nu"));
    const auto& p = j.at("params");
    f.params = VarianceParams{p.at("sigma_s2").get<double>(), p.at("sigma_e2").get<double>(), p.at("rho").get<double>(), f.nu};
    if (j.contains("rho_lattice")) f.rho_lattice = j["rho_lattice"].get<double>();
    f.objective = j.at("objective").get<double>();
    const auto& beta = j.at("beta");
    const auto p_count = static_cast<Eigen::Index>(beta.size());
    f.beta.beta.resize(p_count);
    f.beta.se.resize(p_count);
    f.beta.p_value.resize(p_count);
    for (Eigen::Index k = 0; k < p_count; ++k) {
      const auto& b = beta[static_cast<std::size_t>(k)];
      f.beta.names.push_back(b.at("name").get<std::string>());
      f.beta.beta(k) = b.at("estimate").get<double>();
      f.beta.se(k) = b.at("se").get<double>();
      f.beta.p_value(k) = b.at("p").get<double>();
    }
    if (j.contains("v_sq") && !j["v_sq"].is_null()) f.v_sq = vec_from(j["v_sq"]);
    f.basis_id = j.value("basis_id", "");
    f.converged = j.at("converged").get<bool>();
    f.n_starts = j.at("n_starts").get<int>();
    f.warnings = j.value("warnings", std::vector<std::string>{});
    return f;
  } catch (const json::exception& e) {
    fail(ErrorKind::schema, std::string("malformed fit JSON: ") + e.what());
  }
}

json to_json(const VjSquaredSeries& s) {
  json entries = json::array();
  for (const auto& e : s.entries) entries.push_back({{"j", e.j}, {"v_sq", e.v_sq}, {"fitted", e.fitted}});
  json bands = json::array();
  for (const auto& b : s.bands) bands.push_back({{"first", b.first}, {"last", b.last}});
  return {{"entries", entries}, {"bands", bands}, {"params_ref", s.params_ref}};
}

json to_json(const AvpResult& a) {
  json pts = json::array();
  for (const auto& p : a.points) pts.push_back({{"id", p.id}, {"x", p.x}, {"y", p.y}, {"cook", number(p.cook)}});
  return {{"domain", to_string(a.domain)},
          {"covariate", a.covariate_name},
          {"slope", a.slope},
          {"se", a.se},
          {"p_value", a.p_value},
          {"top_cook", a.top_cook(5)},
          {"warnings", a.warnings},
          {"points", pts}};
}

json to_json(const std::vector<CandidateRank>& ranks) {
  json out = json::array();
  for (const auto& r : ranks) {
    json j = {{"name", r.name}, {"slope", r.slope}, {"p_value", r.p_value}, {"top_cook", r.top_cook}};
    j["covers_focus"] = r.covers_focus ? json(*r.covers_focus) : json(nullptr);
    out.push_back(j);
  }
  return out;
}

json to_json(const GridSpec& s) {
  json j = {{"M1", s.M1}, {"M2", s.M2}, {"lambda", s.lambda}, {"lo", s.lo}, {"hi", s.hi}};
  j["covariate_lambda"] = s.covariate_lambda.value_or(s.lambda);
  return j;
}

json to_json(const std::vector<GridSuggestion>& s) {
  json out = json::array();
  for (const auto& g : s) out.push_back({{"M1", g.M1}, {"M2", g.M2}, {"size_factor", g.size_factor}, {"lambdas", g.lambdas}});
  return out;
}

json to_json(const LambdaCalibration& c) {
  json rows = json::array();
  for (std::size_t i = 0; i < c.lambdas.size(); ++i) {
    rows.push_back({{"lambda", c.lambdas[i]}, {"loss", c.loss[i]}, {"params", to_json(c.gridded[i])}});
  }
  return {{"best_lambda", c.best_lambda}, {"raw", to_json(c.raw)}, {"candidates", rows}};
}

json to_json(const ExperimentTable& t) {
  json cells = json::array();
  for (const auto& c : t.cells) {
    cells.push_back({{"truth", to_json(c.truth)},
                     {"contamination", c.contamination},
                     {"method", to_string(c.method)},
                     {"n_ok", c.n_ok},
                     {"n_failed", c.n_failed},
                     {"mean", triple(c.mean)},
                     {"se", triple(c.se)}});
  }
  return {{"cells", cells}};
}

json to_json(const SweepReport& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"M", c.M},
                     {"lambda", c.lambda},
                     {"blank_fraction", c.blank_fraction},
                     {"method", c.method},
                     {"n_ok", c.n_ok},
                     {"n_failed", c.n_failed},
                     {"mean_log10", triple(c.mean_log10)},
                     {"se_log10", triple(c.se_log10)},
                     {"errors", c.errors}});
  }
  const auto& k = r.config;
  return {{"config",
           {{"n_points", k.n_points},
            {"truth", to_json(k.truth)},
            {"sizes", k.sizes},
            {"lambdas", k.lambdas},
            {"blank_fractions", k.blank_fractions},
            {"replicates", k.replicates},
            {"seed", k.seed}}},
          {"cells", cells}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace gpdiag
