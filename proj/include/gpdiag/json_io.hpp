#pragma once

#include "gpdiag/diagnostics.hpp"
#include "gpdiag/gridding.hpp"
#include "gpdiag/reml.hpp"
#include "gpdiag/simulation.hpp"

#include "json.hpp"

namespace gpdiag {

using json = nlohmann::json;

/// nu as a JSON number, except nu = inf which is the string "inf".
json nu_to_json(Smoothness nu);
Smoothness nu_from_json(const json& j);

json to_json(const VarianceParams& p);
json to_json(const FitResult& fit);
/// Restores the fields written by to_json(FitResult).
FitResult fit_from_json(const json& j);

json to_json(const VjSquaredSeries& s);
json to_json(const AvpResult& a);
json to_json(const std::vector<CandidateRank>& ranks);
json to_json(const GridSpec& spec);
json to_json(const std::vector<GridSuggestion>& s);
json to_json(const LambdaCalibration& c);
json to_json(const ExperimentTable& t);
json to_json(const SweepReport& r);

/// Two-space indented dump followed by a newline.
std::string dump(const json& j);

}  // namespace gpdiag
