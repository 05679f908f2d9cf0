#pragma once
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace bfbf
{

// Unit normalization: wavelength 1 and G/(N0 W) = 1, so the SNR of a link at
// unit distance equals the per-node power P.
struct NetworkConfig
{
    std::size_t n = 0;
    double power = 0.0;
    std::optional<double> gamma;
    std::uint64_t seed = 0;
    double noise_power = 1.0;

    // P = n^{-gamma}
    static NetworkConfig with_gamma(std::size_t n, double gamma, std::uint64_t seed);
    static NetworkConfig with_power(std::size_t n, double power, std::uint64_t seed);
    void validate() const;
};

struct Point
{
    double x = 0.0;
    double y = 0.0;
};

struct NodePlacement
{
    std::vector<Point> positions;
    std::uint64_t seed = 0;

    std::size_t size() const { return positions.size(); }
    double side() const;
};

struct ChannelMatrix
{
    Eigen::MatrixXcd entries;
    std::uint64_t placement_seed = 0;
    std::size_t n() const { return static_cast<std::size_t>(entries.rows()); }
};

struct ClusterLayout
{
    std::size_t grid_cols = 0;
    std::size_t grid_rows = 0;
    double cluster_side = 0.0;
    double cluster_area = 0.0;
    std::vector<std::size_t> membership;
    std::vector<std::vector<std::size_t>> members;
    std::vector<Point> centers;
    Eigen::MatrixXd distances;

    std::size_t cluster_count() const { return centers.size(); }
    // R_j: clusters with d_jk < 2 sqrt(M), including j itself.
    std::vector<std::size_t> near_set(std::size_t j) const;
    // S_j: the complement of R_j.
    std::vector<std::size_t> far_set(std::size_t j) const;
};

struct OccupancyReport
{
    double delta = 0.0;
    std::size_t trials = 0;
    std::size_t violations = 0;
    double violation_frequency = 0.0;
    double bound = 0.0;
};

// Distances below this are treated as coincident nodes.
inline constexpr double kCoincidentDistance = 1e-9;

NodePlacement place_nodes(const NetworkConfig &config);
NodePlacement placement_from_points(std::vector<Point> points, std::uint64_t seed = 0);

double pairwise_distance(const NodePlacement &placement, std::size_t j, std::size_t k);

// exp(2 pi i r) / r with the phase reduced mod 1 before scaling.
std::complex<double> los_gain(double r);

ChannelMatrix build_channel_matrix(const NodePlacement &placement);

// Sub-block H(rows, cols) evaluated directly from geometry; zero where the
// row and column refer to the same node.
Eigen::MatrixXcd channel_block(const NodePlacement &placement, const std::vector<std::size_t> &rows,
                               const std::vector<std::size_t> &cols);

// Half-open cells [a,b) x [c,d); the last row/column is closed at sqrt(n) and
// absorbs the remainder when cluster_side does not divide sqrt(n).
ClusterLayout partition_grid(const NodePlacement &placement, double cluster_side);

// Grid layout on an axis-aligned sub-rectangle, restricted to the given nodes.
ClusterLayout partition_region(const NodePlacement &placement, const std::vector<std::size_t> &nodes, double x0,
                               double y0, double width, double height, double cluster_side);

// Chernoff exponent (1+delta) ln(1+delta) - delta.
double delta_plus(double delta);
double occupancy_bound(std::size_t n, double cluster_area, double delta);
OccupancyReport occupancy_check(const NetworkConfig &config, double cluster_area, double delta, std::size_t trials);

double min_pairwise_distance(const NodePlacement &placement);

// CSV with header "index,x,y".
void write_placement_csv(const NodePlacement &placement, std::ostream &os);
// Row-major complex64 pairs (re, im), little-endian.
void write_matrix_binary(const ChannelMatrix &matrix, std::ostream &os);

} // namespace bfbf
