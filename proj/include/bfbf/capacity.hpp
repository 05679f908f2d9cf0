#pragma once
#include <cstddef>
#include <vector>

#include "bfbf/core_model.hpp"
#include "bfbf/spectral.hpp"

namespace bfbf
{

// Rates in bits/s/Hz, aggregate over the network.
struct RateReport
{
    std::size_t n = 0;
    double P = 0.0;
    double upper_bound = 0.0;
    double tdma_rate = 0.0;
    double scheme_rate = 0.0;
    double scheme_rate_optimistic = 0.0;
    double per_user_rate = 0.0;
};

// P ||H||^2
double capacity_upper_bound(double P, double norm);
double capacity_upper_bound(double P, const NormResult &norm);

// log2(1 + n P / r_max^2) for a single source.
double tdma_rate_for_distance(std::size_t n, double P, double r_max);
// Minimum over all sources; r_max found exactly through the convex hull.
double tdma_baseline_rate(const NetworkConfig &config, const NodePlacement &placement);

// Indices of the convex hull vertices (counter-clockwise).
std::vector<std::size_t> convex_hull(const NodePlacement &placement);
double max_distance_from(const NodePlacement &placement, const std::vector<std::size_t> &hull, std::size_t source);

// n^{1/2-eps} P with P clamped to n^{-1/2}.
double theorem1_predicted_rate(std::size_t n, double P, double epsilon);

// Certified lower bound on ||H||: the larger of 1/r_min and the norm of the
// principal sub-matrix on nodes inside a central square holding ~sub_nodes nodes.
double norm_lower_bound(const NodePlacement &placement, std::size_t sub_nodes = 1024);

} // namespace bfbf
