#pragma once

#include <json.hpp>

#include "contactnet/engine.hpp"
#include "contactnet/fitting.hpp"

namespace contactnet {

using ordered_json = nlohmann::ordered_json;

// FitResult: {family, params, se, vcov: {dims, data}, loglik, n} plus, for the
// power law, x_min_estimated and ks_distance.
ordered_json to_json(const FitResult& fit);
FitResult fit_from_json(const nlohmann::json& j);

ordered_json to_json(const TimeWindow& window);
ordered_json to_json(const StructureReport& report);
StructureReport report_from_json(const nlohmann::json& j);

ordered_json to_json(const TrendSummary& summary);

}  // namespace contactnet
