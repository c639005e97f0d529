#pragma once

#include "gpdiag/diagnostics.hpp"
#include "gpdiag/simulation.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gpdiag {

enum class PlotKind { vj_squared, avp, field_heatmap, a_curve, experiment_table };
std::string to_string(PlotKind k);

struct FieldPayload {
  int M1 = 0;
  int M2 = 0;
  Eigen::VectorXd values;  // lattice order
};

struct CurvePayload {
  std::vector<std::pair<std::string, Eigen::VectorXd>> curves;  // label, a_j over j = 1..
};

/// Exactly one payload must be set, and it must match `kind`.
struct PlotSpec {
  PlotKind kind = PlotKind::vj_squared;
  int width = 720;
  int height = 480;
  std::string title;
  std::optional<VjSquaredSeries> vj;
  std::optional<AvpResult> avp;
  std::optional<FieldPayload> field;
  std::optional<CurvePayload> curves;
  std::optional<ExperimentTable> table;
};

/// Deterministic SVG text. Points of a v_j^2 plot are drawn as their index j.
std::string render_svg(const PlotSpec& spec);
void write_svg(const PlotSpec& spec, const std::string& path);

}  // namespace gpdiag
