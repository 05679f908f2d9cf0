#include "bfbf/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bfbf
{

double capacity_upper_bound(double P, double norm)
{
    if (!(P > 0.0))
        throw std::invalid_argument("power must be positive");
    return P * norm * norm;
}

double capacity_upper_bound(double P, const NormResult &norm)
{
    return capacity_upper_bound(P, norm.value);
}

double tdma_rate_for_distance(std::size_t n, double P, double r_max)
{
    return std::log2(1.0 + static_cast<double>(n) * P / (r_max * r_max));
}

std::vector<std::size_t> convex_hull(const NodePlacement &placement)
{
    const auto &pts = placement.positions;
    std::vector<std::size_t> idx(pts.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return pts[a].x < pts[b].x || (pts[a].x == pts[b].x && pts[a].y < pts[b].y);
    });
    if (idx.size() < 3)
        return idx;
    auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
        return (pts[a].x - pts[o].x) * (pts[b].y - pts[o].y) - (pts[a].y - pts[o].y) * (pts[b].x - pts[o].x);
    };
    std::vector<std::size_t> h(2 * idx.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < idx.size(); ++i)
    {
        while (k >= 2 && cross(h[k - 2], h[k - 1], idx[i]) <= 0)
            --k;
        h[k++] = idx[i];
    }
    for (std::size_t i = idx.size() - 1, t = k + 1; i > 0; --i)
    {
        while (k >= t && cross(h[k - 2], h[k - 1], idx[i - 1]) <= 0)
            --k;
        h[k++] = idx[i - 1];
    }
    h.resize(k - 1);
    return h;
}

double max_distance_from(const NodePlacement &placement, const std::vector<std::size_t> &hull, std::size_t source)
{
    double best = 0.0;
    for (std::size_t v : hull)
        best = std::max(best, pairwise_distance(placement, source, v));
    return best;
}

double tdma_baseline_rate(const NetworkConfig &config, const NodePlacement &placement)
{
    config.validate();
    const auto hull = convex_hull(placement);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < placement.size(); ++s)
        worst = std::min(worst, tdma_rate_for_distance(config.n, config.power, max_distance_from(placement, hull, s)));
    return worst;
}

double theorem1_predicted_rate(std::size_t n, double P, double epsilon)
{
    if (!(epsilon > 0.0))
        throw std::invalid_argument("epsilon must be positive");
    const double nn = static_cast<double>(n);
    const double p = std::min(P, 1.0 / std::sqrt(nn));
    return std::pow(nn, 0.5 - epsilon) * p;
}

double norm_lower_bound(const NodePlacement &placement, std::size_t sub_nodes)
{
    const double side = placement.side();
    const double half = 0.5 * std::min(side, std::sqrt(static_cast<double>(sub_nodes)));
    std::vector<std::size_t> sub;
    for (std::size_t i = 0; i < placement.size(); ++i)
    {
        const auto &p = placement.positions[i];
        if (std::abs(p.x - 0.5 * side) < half && std::abs(p.y - 0.5 * side) < half)
            sub.push_back(i);
    }
    double lb = 1.0 / min_pairwise_distance(placement);
    if (sub.size() >= 2)
    {
        // The power-iteration estimate ||A v|| with unit v never exceeds ||A||.
        const auto r = spectral_norm(channel_block(placement, sub, sub), 1e-8);
        lb = std::max(lb, r.value);
    }
    return lb;
}

} // namespace bfbf
