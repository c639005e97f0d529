#include "gpdiag/cli.hpp"

#include "gpdiag/errors.hpp"
#include "gpdiag/json_io.hpp"
#include "gpdiag/plot.hpp"
#include "gpdiag/service.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

namespace gpdiag {

namespace {

namespace fs = std::filesystem;

struct DataFlags {
  std::string csv;
  std::vector<std::string> loc;
  std::string outcome;
  std::vector<std::string> covariates;
};

void add_data_flags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--csv", f.csv, "input CSV")->required();
  cmd->add_option("--loc", f.loc, "one or two location columns")->required()->delimiter(',')->expected(1, 2);
  cmd->add_option("--outcome", f.outcome, "outcome column")->required();
  cmd->add_option("--covariates", f.covariates, "model covariates")->delimiter(',');
}

Dataset load(const DataFlags& f) { return ingest_csv(f.csv, Schema{f.loc, f.outcome, std::nullopt}); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) fail(ErrorKind::validation, "cannot write '" + path.string() + "'");
  file << text;
}

json read_json(const std::string& path) {
  std::ifstream file(path);
  if (!file) fail(ErrorKind::validation, "cannot read '" + path + "'");
  try {
    return json::parse(file);
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, "'" + path + "' is not valid JSON: " + e.what());
  }
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::parameter: return kExitUsage;
    case ErrorKind::numerical:
    case ErrorKind::optimization:
    case ErrorKind::degenerate: return kExitNumerical;
    default: return kExitData;
  }
}

std::string file_stem(std::string name) {
  for (char& c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') c = '_';
  }
  return name;
}

std::vector<std::string> design_covariates(const FitResult& f) {
  std::vector<std::string> out;
  for (const auto& n : f.beta.names) {
    if (n != kInterceptName) out.push_back(n);
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diagnostics for linear mixed models with Gaussian-process random effects", "gpdiag"};
  app.require_subcommand(1);
  std::string out_dir = ".";
  app.add_option("--out-dir", out_dir, "directory for output files");

  // fit
  DataFlags fit_data;
  std::string method = "exact", nu = "0.5";
  std::uint64_t seed = 20140701;
  bool plot = false;
  int starts = 8;
  auto* fit_cmd = app.add_subcommand("fit", "maximize the restricted likelihood; writes fit.json");
  add_data_flags(fit_cmd, fit_data);
  fit_cmd->add_option("--method", method, "exact or approximate");
  fit_cmd->add_option("--nu", nu, "Matern smoothness: 0.5, 1.5, 2.5 or inf");
  fit_cmd->add_option("--seed", seed, "optimizer seed");
  fit_cmd->add_option("--starts", starts, "optimizer starts")->check(CLI::PositiveNumber);
  fit_cmd->add_flag("--plot", plot, "also write vj_squared.svg (grid data)");
  fit_cmd->add_option("--out-dir", out_dir);

  // diagnose
  DataFlags diag_data;
  std::string fit_path;
  auto* diag_cmd = app.add_subcommand("diagnose", "v_j^2 series and a_j curve for a prior fit (grid data)");
  add_data_flags(diag_cmd, diag_data);
  diag_cmd->add_option("--fit", fit_path, "fit.json from `fit`")->required();
  diag_cmd->add_flag("--plot", plot, "also write SVG plots");
  diag_cmd->add_option("--out-dir", out_dir);

  // avp
  DataFlags avp_data;
  std::vector<std::string> candidates;
  std::string domain = "both";
  int focus_j = 0;
  auto* avp_cmd = app.add_subcommand("avp", "added variable plots for candidate covariates");
  add_data_flags(avp_cmd, avp_data);
  avp_cmd->add_option("--fit", fit_path, "fit.json from `fit`")->required();
  avp_cmd->add_option("--candidates", candidates, "candidate columns")->required()->delimiter(',');
  avp_cmd->add_option("--domain", domain, "observation, spectral or both")
      ->check(CLI::IsMember({"observation", "spectral", "both"}));
  avp_cmd->add_option("--focus-j", focus_j, "frequency index to check coverage of (default: largest v_j^2)");
  avp_cmd->add_option("--out-dir", out_dir);

  // grid
  DataFlags grid_data;
  int m1 = 0, m2 = 0;
  double lambda = 7.0;
  std::optional<double> covariate_lambda;
  auto* grid_cmd = app.add_subcommand("grid", "IDW-smooth irregular data onto an M1 x M2 lattice");
  add_data_flags(grid_cmd, grid_data);
  grid_cmd->add_option("--m1", m1, "lattice size along the first location");
  grid_cmd->add_option("--m2", m2, "lattice size along the second location");
  grid_cmd->add_option("--lambda", lambda, "IDW power");
  grid_cmd->add_option("--covariate-lambda", covariate_lambda, "IDW power for covariates (default: --lambda)");
  grid_cmd->add_flag("--plot", plot, "also write field_heatmap.svg");
  grid_cmd->add_option("--out-dir", out_dir);

  // simulate
  std::string preset;
  std::string demo;
  int replicates = 20;
  auto* sim_cmd = app.add_subcommand("simulate", "contamination experiments or demo datasets");
  sim_cmd->add_option("--preset", preset, "table2, mean_shift or range_change");
  sim_cmd->add_option("--demo", demo, "trend_outlier: write a 20 x 20 demo dataset")
      ->check(CLI::IsMember({"trend_outlier"}));
  sim_cmd->add_option("--replicates", replicates)->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", seed);
  sim_cmd->add_flag("--plot", plot, "also write experiment_table.svg");
  sim_cmd->add_option("--out-dir", out_dir);

  // sweep
  SweepConfig sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "grid-size / lambda sweep on simulated irregular data");
  sweep_cmd->add_option("--sizes", sweep.sizes)->delimiter(',');
  sweep_cmd->add_option("--lambdas", sweep.lambdas)->delimiter(',');
  sweep_cmd->add_option("--blank", sweep.blank_fractions, "blank wedge fractions: 0, 0.125, 0.25")->delimiter(',');
  sweep_cmd->add_option("--replicates", sweep.replicates)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--n-points", sweep.n_points)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seed", sweep.seed);
  sweep_cmd->add_option("--out-dir", out_dir);

  // serve
  ServiceConfig service;
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP session service");
  serve_cmd->add_option("--bind", service.bind);
  serve_cmd->add_option("--port", service.port);
  serve_cmd->add_option("--data-dir", service.data_dir);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "gpdiag: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const fs::path dir(out_dir);
    if (!serve_cmd->parsed()) fs::create_directories(dir);

    if (fit_cmd->parsed()) {
      const Dataset data = load(fit_data);
      FitOptions opt;
      opt.method = method_from_string(method);
      opt.nu = smoothness_from_string(nu);
      opt.optimizer.seed = seed;
      opt.optimizer.starts = starts;
      const auto design = make_design(data, fit_data.covariates);
      const FitResult f = fit(data, design, opt);
      write_text(dir / "fit.json", dump(to_json(f)));
      out << "sigma_s2 " << f.params.sigma_s2 << "  sigma_e2 " << f.params.sigma_e2 << "  rho " << f.params.rho
          << "  objective " << f.objective << '\n';
      for (const auto& w : f.warnings) err << "warning: " << w << '\n';
      if (plot) {
        if (!data.is_grid()) {
          err << "warning: v_j^2 plot needs grid data; skipped\n";
        } else {
          const auto view = spectral_view(basis_for(data), data, design, f);
          PlotSpec p;
          p.kind = PlotKind::vj_squared;
          p.title = "v_j^2 with fitted mean";
          p.vj = vj_squared_series(view, "fit.json");
          write_svg(p, (dir / "vj_squared.svg").string());
        }
      }
      return kExitOk;
    }

    if (diag_cmd->parsed()) {
      const Dataset data = load(diag_data);
      if (!data.is_grid()) fail(ErrorKind::precondition, "v_j^2 diagnostics require grid (run `grid` first)");
      const FitResult f = fit_from_json(read_json(fit_path));
      const auto design = make_design(data, design_covariates(f));
      const auto view = spectral_view(basis_for(data), data, design, f);
      const auto series = vj_squared_series(view, fit_path);
      write_text(dir / "vj_squared.json", dump(to_json(series)));
      if (plot) {
        PlotSpec p;
        p.kind = PlotKind::vj_squared;
        p.title = "v_j^2 with fitted mean";
        p.vj = series;
        write_svg(p, (dir / "vj_squared.svg").string());
        PlotSpec c;
        c.kind = PlotKind::a_curve;
        c.title = "a_j at the fitted range";
        c.curves = CurvePayload{{{"rho = " + std::to_string(view.lattice_params.rho) + " (lattice)", view.a}}};
        write_svg(c, (dir / "a_curve.svg").string());
      }
      Eigen::Index jmax = 0;
      view.v_sq.maxCoeff(&jmax);
      out << "largest v_j^2 at j = " << jmax + 1 << '\n';
      return kExitOk;
    }

    if (avp_cmd->parsed()) {
      const Dataset data = load(avp_data);
      const FitResult f = fit_from_json(read_json(fit_path));
      const auto in_model = design_covariates(f);
      const auto design = make_design(data, in_model);
      std::vector<Domain> domains;
      if (domain != "spectral") domains.push_back(Domain::observation);
      if (domain != "observation") domains.push_back(Domain::spectral);

      std::optional<SpectralBasis> basis;
      std::optional<SpectralView> view;
      if (data.is_grid()) {
        basis = basis_for(data);
        view = spectral_view(*basis, data, design, f);
      } else if (domain != "observation") {
        fail(ErrorKind::precondition, "spectral AVPs require grid (run `grid` first)");
      }
      std::optional<int> focus;
      if (focus_j > 0) {
        focus = focus_j;
      } else if (view) {
        Eigen::Index jmax = 0;
        view->v_sq.maxCoeff(&jmax);
        focus = static_cast<int>(jmax) + 1;
      }
      std::optional<Eigen::MatrixXd> V;
      if (domain != "spectral") V = fitted_covariance(data, f, basis ? &*basis : nullptr);

      json summary;
      summary["fit"] = fit_path;
      summary["focus_j"] = focus ? json(*focus) : json(nullptr);
      summary["in_model"] = in_model;
      for (Domain d : domains) {
        std::vector<AvpResult> results;
        std::vector<std::string> skipped;
        for (const auto& name : candidates) {
          if (std::find(in_model.begin(), in_model.end(), name) != in_model.end()) {
            skipped.push_back(name);
            continue;
          }
          const Covariate c{name, data.covariate(name)};
          AvpResult r = d == Domain::observation ? avp_observation(data, design, c, *V)
                                                 : avp_spectral(data, *basis, design, c, *view);
          const std::string stem = "avp_" + file_stem(name) + "_" + to_string(d);
          write_text(dir / (stem + ".json"), dump(to_json(r)));
          PlotSpec p;
          p.kind = PlotKind::avp;
          p.title = "Added variable plot: " + name + " (" + to_string(d) + ")";
          p.avp = r;
          write_svg(p, (dir / (stem + ".svg")).string());
          results.push_back(std::move(r));
        }
        const auto ranks = rank_candidates(results, d == Domain::spectral ? focus : std::nullopt);
        json rows = to_json(ranks);
        for (const auto& name : skipped) rows.push_back({{"name", name}, {"slope", "--"}, {"p_value", "--"}});
        summary["domains"][to_string(d)] = rows;
        for (const auto& r : ranks) out << to_string(d) << "  " << r.name << "  slope " << r.slope << "  p " << r.p_value << '\n';
        for (const auto& name : skipped) out << to_string(d) << "  " << name << "  --\n";
      }
      write_text(dir / "summary.json", dump(summary));
      return kExitOk;
    }

    if (grid_cmd->parsed()) {
      const Dataset data = load(grid_data);
      if (m1 == 0 && m2 == 0) {
        const auto s = suggest_grid(data);
        write_text(dir / "grid_suggestions.json", dump(to_json(s)));
        for (const auto& g : s) out << g.M1 << " x " << g.M2 << "  (size factor " << g.size_factor << ")\n";
        out << "rerun with --m1 and --m2 to grid\n";
        return kExitOk;
      }
      GridSpec spec = make_grid_spec(data, m1, m2, lambda);
      spec.covariate_lambda = covariate_lambda;
      const GriddedData g = grid_dataset(data, spec);
      export_csv(g.data, (dir / "gridded.csv").string());
      json meta = to_json(spec);
      meta["unit"] = g.unit;
      write_text(dir / "grid.json", dump(meta));
      if (plot) {
        PlotSpec p;
        p.kind = PlotKind::field_heatmap;
        p.title = "IDW pseudo-data: " + g.data.outcome_name();
        p.field = FieldPayload{m1, m2, g.data.to_lattice_order(g.data.y())};
        write_svg(p, (dir / "field_heatmap.svg").string());
      }
      out << "wrote " << g.data.size() << " lattice rows\n";
      return kExitOk;
    }

    if (sim_cmd->parsed()) {
      if (preset.empty() == demo.empty()) fail(ErrorKind::parameter, "simulate needs exactly one of --preset or --demo");
      if (!demo.empty()) {
        const auto d = appendix_g_demo(seed);
        export_csv(d.data, (dir / "demo.csv").string());
        out << "wrote demo.csv (" << d.data.size() << " rows)\n";
        return kExitOk;
      }
      const ExperimentConfig cfg = experiment_preset(preset, replicates, seed);
      const ExperimentTable t = run_experiment(cfg);
      write_text(dir / "experiment.csv", experiment_csv(t));
      write_text(dir / "experiment.json", dump(to_json(t)));
      if (plot) {
        PlotSpec p;
        p.kind = PlotKind::experiment_table;
        p.height = std::max(200, 90 + 16 * static_cast<int>(t.cells.size()));
        p.title = "Mean estimates (Monte Carlo SE), preset " + preset;
        p.table = t;
        write_svg(p, (dir / "experiment_table.svg").string());
      }
      out << "wrote " << t.cells.size() << " cells\n";
      return kExitOk;
    }

    if (sweep_cmd->parsed()) {
      const SweepReport r = idw_sweep(sweep);
      write_text(dir / "sweep.csv", sweep_csv(r));
      write_text(dir / "sweep.json", dump(to_json(r)));
      out << "wrote " << r.cells.size() << " cells\n";
      return kExitOk;
    }

    if (serve_cmd->parsed()) return run_server(service);
  } catch (const Error& e) {
    err << "gpdiag: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "gpdiag: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace gpdiag
