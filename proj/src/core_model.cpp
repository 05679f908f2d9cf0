#include "bfbf/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <ostream>

#include "bfbf/errors.hpp"
#include "bfbf/rng.hpp"

namespace bfbf
{

NetworkConfig NetworkConfig::with_gamma(std::size_t n, double gamma, std::uint64_t seed)
{
    NetworkConfig c;
    c.n = n;
    c.gamma = gamma;
    c.power = std::pow(static_cast<double>(n), -gamma);
    c.seed = seed;
    c.validate();
    return c;
}

NetworkConfig NetworkConfig::with_power(std::size_t n, double power, std::uint64_t seed)
{
    NetworkConfig c;
    c.n = n;
    c.power = power;
    c.seed = seed;
    c.validate();
    return c;
}

void NetworkConfig::validate() const
{
    if (n < 2)
        throw invalid_config("n must be at least 2");
    if (!(power > 0.0) || !std::isfinite(power))
        throw invalid_config("power must be positive and finite");
    if (noise_power != 1.0)
        throw invalid_config("noise power is fixed at 1 by the unit normalization");
    if (gamma && power != std::pow(static_cast<double>(n), -*gamma))
        throw invalid_config("power does not match n^-gamma");
}

double NodePlacement::side() const
{
    return std::sqrt(static_cast<double>(positions.size()));
}

NodePlacement place_nodes(const NetworkConfig &config)
{
    config.validate();
    NodePlacement p;
    p.seed = config.seed;
    p.positions.resize(config.n);
    const double side = std::sqrt(static_cast<double>(config.n));
    Rng g = make_stream(config.seed);
    for (auto &pt : p.positions)
    {
        pt.x = uniform01(g) * side;
        pt.y = uniform01(g) * side;
    }
    return p;
}

NodePlacement placement_from_points(std::vector<Point> points, std::uint64_t seed)
{
    NodePlacement p;
    p.positions = std::move(points);
    p.seed = seed;
    return p;
}

double pairwise_distance(const NodePlacement &placement, std::size_t j, std::size_t k)
{
    const Point &a = placement.positions.at(j);
    const Point &b = placement.positions.at(k);
    return std::hypot(a.x - b.x, a.y - b.y);
}

std::complex<double> los_gain(double r)
{
    const double frac = r - std::floor(r);
    return std::polar(1.0 / r, 2.0 * std::numbers::pi * frac);
}

ChannelMatrix build_channel_matrix(const NodePlacement &placement)
{
    const std::size_t n = placement.size();
    ChannelMatrix h;
    h.placement_seed = placement.seed;
    h.entries = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k)
    {
        for (std::size_t j = k + 1; j < n; ++j)
        {
            const double r = pairwise_distance(placement, j, k);
            if (r < kCoincidentDistance)
                throw degenerate_placement(k, j);
            const auto v = los_gain(r);
            h.entries(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = v;
            h.entries(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return h;
}

Eigen::MatrixXcd channel_block(const NodePlacement &placement, const std::vector<std::size_t> &rows,
                               const std::vector<std::size_t> &cols)
{
    Eigen::MatrixXcd b(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
    {
        for (std::size_t r = 0; r < rows.size(); ++r)
        {
            if (rows[r] == cols[c])
            {
                b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 0.0;
                continue;
            }
            const double d = pairwise_distance(placement, rows[r], cols[c]);
            if (d < kCoincidentDistance)
                throw degenerate_placement(rows[r], cols[c]);
            b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = los_gain(d);
        }
    }
    return b;
}

std::vector<std::size_t> ClusterLayout::near_set(std::size_t j) const
{
    std::vector<std::size_t> out;
    const double lim = 2.0 * std::sqrt(cluster_area);
    for (std::size_t k = 0; k < cluster_count(); ++k)
        if (distances(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) < lim)
            out.push_back(k);
    return out;
}

std::vector<std::size_t> ClusterLayout::far_set(std::size_t j) const
{
    std::vector<std::size_t> out;
    const double lim = 2.0 * std::sqrt(cluster_area);
    for (std::size_t k = 0; k < cluster_count(); ++k)
        if (distances(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) >= lim)
            out.push_back(k);
    return out;
}

namespace
{

std::size_t cell_of(double v, double origin, double side, std::size_t count)
{
    const double f = std::floor((v - origin) / side);
    if (f < 0.0)
        return 0;
    return std::min(static_cast<std::size_t>(f), count - 1);
}

// Cell edges along one axis: count-1 regular cells, the last one absorbs the rest.
double cell_lo(std::size_t i, double origin, double side)
{
    return origin + static_cast<double>(i) * side;
}

double cell_hi(std::size_t i, std::size_t count, double origin, double extent, double side)
{
    return i + 1 == count ? origin + extent : origin + static_cast<double>(i + 1) * side;
}

} // namespace

ClusterLayout partition_region(const NodePlacement &placement, const std::vector<std::size_t> &nodes, double x0,
                               double y0, double width, double height, double cluster_side)
{
    if (!(cluster_side > 0.0) || cluster_side > std::max(width, height) * (1.0 + 1e-12))
        throw invalid_partition("cluster side must lie in (0, region side]");
    ClusterLayout L;
    L.cluster_side = cluster_side;
    L.cluster_area = cluster_side * cluster_side;
    L.grid_cols = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(width / cluster_side + 1e-12)));
    L.grid_rows = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(height / cluster_side + 1e-12)));
    const std::size_t K = L.grid_cols * L.grid_rows;
    L.members.assign(K, {});
    L.centers.resize(K);
    for (std::size_t r = 0; r < L.grid_rows; ++r)
    {
        for (std::size_t c = 0; c < L.grid_cols; ++c)
        {
            const double xl = cell_lo(c, x0, cluster_side), xh = cell_hi(c, L.grid_cols, x0, width, cluster_side);
            const double yl = cell_lo(r, y0, cluster_side), yh = cell_hi(r, L.grid_rows, y0, height, cluster_side);
            L.centers[r * L.grid_cols + c] = {0.5 * (xl + xh), 0.5 * (yl + yh)};
        }
    }
    L.membership.assign(placement.size(), std::numeric_limits<std::size_t>::max());
    for (std::size_t idx : nodes)
    {
        const Point &p = placement.positions[idx];
        const std::size_t c = cell_of(p.x, x0, cluster_side, L.grid_cols);
        const std::size_t r = cell_of(p.y, y0, cluster_side, L.grid_rows);
        L.membership[idx] = r * L.grid_cols + c;
        L.members[r * L.grid_cols + c].push_back(idx);
    }
    L.distances.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
    for (std::size_t a = 0; a < K; ++a)
        for (std::size_t b = 0; b < K; ++b)
            L.distances(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                std::hypot(L.centers[a].x - L.centers[b].x, L.centers[a].y - L.centers[b].y);
    return L;
}

ClusterLayout partition_grid(const NodePlacement &placement, double cluster_side)
{
    const double side = placement.side();
    if (!(cluster_side > 0.0) || cluster_side > side * (1.0 + 1e-12))
        throw invalid_partition("cluster side must lie in (0, sqrt(n)]");
    std::vector<std::size_t> all(placement.size());
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = i;
    return partition_region(placement, all, 0.0, 0.0, side, side, cluster_side);
}

double delta_plus(double delta)
{
    return (1.0 + delta) * std::log1p(delta) - delta;
}

double occupancy_bound(std::size_t n, double cluster_area, double delta)
{
    return static_cast<double>(n) / cluster_area * std::exp(-delta_plus(delta) * cluster_area);
}

OccupancyReport occupancy_check(const NetworkConfig &config, double cluster_area, double delta, std::size_t trials)
{
    config.validate();
    if (trials == 0)
        throw invalid_config("trials must be positive");
    if (!(delta > 0.0))
        throw invalid_config("delta must be positive");
    if (!(cluster_area > 0.0) || cluster_area >= static_cast<double>(config.n))
        throw invalid_config("cluster area must lie in (0, n)");
    OccupancyReport rep;
    rep.delta = delta;
    rep.trials = trials;
    rep.bound = occupancy_bound(config.n, cluster_area, delta);
    const double lo = (1.0 - delta) * cluster_area, hi = (1.0 + delta) * cluster_area;
    for (std::size_t t = 0; t < trials; ++t)
    {
        NetworkConfig c = config;
        c.seed = config.seed ^ static_cast<std::uint64_t>(t);
        const auto layout = partition_grid(place_nodes(c), std::sqrt(cluster_area));
        const bool bad = std::any_of(layout.members.begin(), layout.members.end(), [&](const auto &m) {
            const double cnt = static_cast<double>(m.size());
            return cnt < lo || cnt > hi;
        });
        if (bad)
            ++rep.violations;
    }
    rep.violation_frequency = static_cast<double>(rep.violations) / static_cast<double>(trials);
    return rep;
}

double min_pairwise_distance(const NodePlacement &placement)
{
    const std::size_t n = placement.size();
    if (n < 2)
        return std::numeric_limits<double>::infinity();
    double xmin = placement.positions[0].x, xmax = xmin, ymin = placement.positions[0].y, ymax = ymin;
    for (const auto &p : placement.positions)
    {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    // Buckets of roughly one node each; the nearest neighbour of the closest
    // pair is always within the 3x3 neighbourhood once h >= current best.
    const double area = std::max((xmax - xmin) * (ymax - ymin), 1e-300);
    double h = std::sqrt(area / static_cast<double>(n));
    if (!(h > 0.0))
        h = 1.0;
    const auto cols = static_cast<std::size_t>(std::floor((xmax - xmin) / h)) + 1;
    const auto rows = static_cast<std::size_t>(std::floor((ymax - ymin) / h)) + 1;
    std::vector<std::vector<std::size_t>> grid(cols * rows);
    for (std::size_t i = 0; i < n; ++i)
    {
        const auto c = static_cast<std::size_t>((placement.positions[i].x - xmin) / h);
        const auto r = static_cast<std::size_t>((placement.positions[i].y - ymin) / h);
        grid[std::min(r, rows - 1) * cols + std::min(c, cols - 1)].push_back(i);
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows; ++r)
    {
        for (std::size_t c = 0; c < cols; ++c)
        {
            for (std::size_t a : grid[r * cols + c])
            {
                for (std::size_t rr = (r ? r - 1 : 0); rr <= std::min(r + 1, rows - 1); ++rr)
                    for (std::size_t cc = (c ? c - 1 : 0); cc <= std::min(c + 1, cols - 1); ++cc)
                        for (std::size_t b : grid[rr * cols + cc])
                            if (b > a)
                                best = std::min(best, pairwise_distance(placement, a, b));
            }
        }
    }
    if (best > h)
    {
        // Sparse configuration: fall back to brute force.
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b)
                best = std::min(best, pairwise_distance(placement, a, b));
    }
    return best;
}

void write_placement_csv(const NodePlacement &placement, std::ostream &os)
{
    os << "index,x,y\n";
    os.precision(17);
    for (std::size_t i = 0; i < placement.size(); ++i)
        os << i << ',' << placement.positions[i].x << ',' << placement.positions[i].y << '\n';
}

void write_matrix_binary(const ChannelMatrix &matrix, std::ostream &os)
{
    const auto n = static_cast<Eigen::Index>(matrix.n());
    for (Eigen::Index j = 0; j < n; ++j)
    {
        for (Eigen::Index k = 0; k < n; ++k)
        {
            const float re = static_cast<float>(matrix.entries(j, k).real());
            const float im = static_cast<float>(matrix.entries(j, k).imag());
            unsigned char buf[8];
            std::uint32_t a, b;
            std::memcpy(&a, &re, 4);
            std::memcpy(&b, &im, 4);
            for (int i = 0; i < 4; ++i)
            {
                buf[i] = static_cast<unsigned char>(a >> (8 * i));
                buf[4 + i] = static_cast<unsigned char>(b >> (8 * i));
            }
            os.write(reinterpret_cast<const char *>(buf), 8);
        }
    }
}

} // namespace bfbf
