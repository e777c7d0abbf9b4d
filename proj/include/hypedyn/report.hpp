#pragma once

#include "hypedyn/estimate.hpp"
#include "hypedyn/panel.hpp"

#include <json.hpp>

namespace hypedyn::econ {

/// Coefficient table (name, estimate, se, t) plus fit statistics.
nlohmann::json to_json(const FitResult& fit);
/// Second stage, first stages with their excluded-instrument F, and J.
nlohmann::json to_json(const IvResult& iv);
nlohmann::json to_json(const ImpactResult& impact);
nlohmann::json to_json(const PeerEstimates& peers);

}  // namespace hypedyn::econ
