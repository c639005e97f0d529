#include "test_util.hpp"

#include "gpdiag/json_io.hpp"
#include "gpdiag/plot.hpp"

#include <cmath>
#include <limits>

using namespace gpdiag;
using gpdiag::test::kind_of;

TEST_CASE("fit results round-trip through JSON") {
  FitResult f;
  f.method = Method::approximate;
  f.nu = Smoothness::infinite;
  f.params = VarianceParams{2.5, 0.75, 12.0, Smoothness::infinite};
  f.rho_lattice = 6.0;
  f.objective = -321.5;
  f.beta.names = {"(Intercept)", "x"};
  f.beta.beta = Eigen::Vector2d(1, -2);
  f.beta.se = Eigen::Vector2d(0.1, 0.2);
  f.beta.p_value = Eigen::Vector2d(1e-20, 0.3);
  f.beta.cov = Eigen::Matrix2d::Identity();
  f.v_sq = Eigen::Vector3d(1, 2, 3);
  f.basis_id = "spectral-2d-4x6";
  f.converged = true;
  f.n_starts = 8;
  f.warnings = {"rho is at its upper bound"};
  const json j = to_json(f);
  CHECK(j["nu"] == "inf");
  const FitResult g = fit_from_json(json::parse(dump(j)));
  CHECK(g.method == f.method);
  CHECK(g.nu == f.nu);
  CHECK(g.params.sigma_s2 == f.params.sigma_s2);
  CHECK(g.params.rho == f.params.rho);
  CHECK(g.rho_lattice == f.rho_lattice);
  CHECK(g.objective == f.objective);
  CHECK(g.beta.names == f.beta.names);
  CHECK(g.beta.beta == f.beta.beta);
  REQUIRE(g.v_sq.has_value());
  CHECK(*g.v_sq == *f.v_sq);
  CHECK(g.basis_id == f.basis_id);
  CHECK(g.warnings == f.warnings);
  CHECK(kind_of([] { fit_from_json(json::parse(R"({"method": 3})")); }) == ErrorKind::schema);
  CHECK(nu_from_json(json(1.5)) == Smoothness::three_halves);
  CHECK(dump(json{{"a", 1}}).back() == '\n');
}

TEST_CASE("non-finite values serialize as strings") {
  AvpResult a;
  a.covariate_name = "c";
  a.points = {{1, 0.0, 1.0, std::numeric_limits<double>::infinity()}};
  const json j = to_json(a);
  CHECK(j["points"][0]["cook"] == "inf");
  CHECK(j["domain"] == "observation");
  CHECK(json::parse(dump(j)).is_object());
}

TEST_CASE("SVG rendering is deterministic and checks its payload") {
  Eigen::VectorXd v_sq(5), a(5);
  v_sq << 9, 4, 3, 1, 0.5;
  a << 4, 2, 1, 0.5, 0.25;
  PlotSpec s;
  s.kind = PlotKind::vj_squared;
  s.title = "v_j^2 <test>";
  s.vj = vj_squared_series(v_sq, a, VarianceParams{2, 0.5, 5});
  const std::string svg = render_svg(s);
  CHECK(svg == render_svg(s));
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("&lt;test&gt;") != std::string::npos);
  CHECK(svg.find(">5</text>") != std::string::npos);  // j-number glyph
  CHECK(svg.find("<polyline") != std::string::npos);

  PlotSpec wrong = s;
  wrong.kind = PlotKind::avp;
  CHECK(kind_of([&] { render_svg(wrong); }) == ErrorKind::validation);
  PlotSpec two = s;
  two.field = FieldPayload{2, 2, Eigen::Vector4d(1, 2, 3, 4)};
  CHECK(kind_of([&] { render_svg(two); }) == ErrorKind::validation);

  PlotSpec heat;
  heat.kind = PlotKind::field_heatmap;
  heat.field = FieldPayload{2, 2, Eigen::Vector4d(1, 2, 3, 4)};
  CHECK(render_svg(heat).find("<rect x=") != std::string::npos);
  heat.field->M1 = 3;
  CHECK(kind_of([&] { render_svg(heat); }) == ErrorKind::validation);

  PlotSpec avp;
  avp.kind = PlotKind::avp;
  AvpResult r;
  r.slope = 1.0;
  for (int i = 1; i <= 10; ++i) r.points.push_back({i, 0.1 * i, 0.1 * i + (i == 7 ? 2.0 : 0.0), i == 7 ? 9.0 : 0.1});
  avp.avp = r;
  CHECK(render_svg(avp).find(">7</text>") != std::string::npos);

  PlotSpec curves;
  curves.kind = PlotKind::a_curve;
  curves.curves = CurvePayload{{{"rho=5", a}, {"rho=10", 2 * a}}};
  CHECK(render_svg(curves).find("rho=10") != std::string::npos);
}
