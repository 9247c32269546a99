#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "contactnet/engine.hpp"
#include "contactnet/fitting.hpp"

namespace contactnet {

struct PlotOptions {
    bool log_log = false;
    int width = 640;
    int height = 480;
    std::string title = "Degree distribution";
};

/// Value of a fitted curve at x: density for the continuous families, mass
/// for the discrete ones. Power-law mass is zero below x_min.
double fitted_curve(const Distribution& dist, double x);

/// Standalone SVG: empirical PMF as a scatter plus one polyline per fit.
/// `sample_size` rescales the power-law curve by its tail share. Throws
/// std::invalid_argument on an empty distribution.
std::string render_degree_plot(const std::map<std::uint64_t, double>& pmf, const std::vector<FitResult>& fits,
                               std::size_t sample_size, const PlotOptions& options = {});

std::string render_report_plot(const StructureReport& report, const PlotOptions& options = {});

}  // namespace contactnet
