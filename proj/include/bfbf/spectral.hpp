#pragma once
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bfbf/calibration.hpp"
#include "bfbf/core_model.hpp"

namespace bfbf
{

struct NormResult
{
    double value = 0.0;
    std::size_t iterations = 0;
    // Relative change of the estimate at the final step.
    double residual = 0.0;
};

// Power iteration on A^H A from the normalized all-ones vector. Stops when the
// relative change of the estimate is <= tolerance. max_iterations = 0 selects
// max(10 n, 1000). Throws convergence_failure carrying the best estimate.
NormResult spectral_norm(const Eigen::MatrixXcd &a, double tolerance = 1e-8, std::size_t max_iterations = 0);
NormResult spectral_norm(const ChannelMatrix &h, double tolerance = 1e-8, std::size_t max_iterations = 0);

// Largest singular value from the eigenvalues of the smaller Gram matrix.
// Dense and direct; used where an upper bound must not be underestimated.
double exact_norm(const Eigen::MatrixXcd &a);

struct BlockPartition
{
    std::size_t K = 0;
    double M = 0.0;
    // Cluster-sorted node order; block b covers permutation[ranges[b].first, ranges[b].second).
    std::vector<std::size_t> permutation;
    std::vector<std::pair<std::size_t, std::size_t>> ranges;

    static BlockPartition from_layout(const ClusterLayout &layout);
    // One node per block (the classical row-sum case).
    static BlockPartition singletons(std::size_t n);
    static BlockPartition single_block(std::size_t n);
    void validate(std::size_t n) const;
    std::vector<std::size_t> block_nodes(std::size_t b) const;
};

struct GershgorinResult
{
    double value = 0.0;
    // Smallest block index attaining the maximum.
    std::size_t argmax = 0;
    bool attained_on_rows = true;
};

GershgorinResult block_gershgorin(const Eigen::MatrixXcd &a, const BlockPartition &partition,
                                  double tolerance = 1e-10);
double block_gershgorin_bound(const Eigen::MatrixXcd &a, const BlockPartition &partition, double tolerance = 1e-10);
double block_gershgorin_bound(const ChannelMatrix &h, const BlockPartition &partition, double tolerance = 1e-10);

// max_j sum_{k != j} 1/r_jk over the given nodes, straight from geometry.
double gershgorin_m1_bound(const NodePlacement &placement, const std::vector<std::size_t> &nodes);
double gershgorin_m1_bound(const NodePlacement &placement);

// f(b) = 3b / (4b + 2) on [1/4, 1/2].
double exponent_map(double b);
// b_0, f(b_0), ... with `count` entries.
std::vector<double> exponent_sequence(double b0, std::size_t count);

struct RecursionTrace
{
    std::vector<double> exponent_sequence;
    std::vector<std::size_t> chosen_M_sequence;
    std::size_t levels_used = 0;
    std::size_t window_blocks = 0;
    std::size_t measured_blocks = 0;
    double final_bound = 0.0;
};

struct RecursionOptions
{
    std::size_t depth = 8;
    double epsilon = 0.05;
    double c = kBlockLawConstant;
    double b0 = 0.5;
    std::size_t min_block_nodes = 64;
    double exponent_gap = 1e-3;
    double tolerance = 1e-10;
    // Multiplies the block area n^{3/(4b+2)}. Values below 1 make the
    // recursion engage on small networks (the top level only recurses for
    // n >= 65536 otherwise).
    double area_scale = 1.0;
};

std::pair<double, RecursionTrace> recursive_norm_bound(const NodePlacement &placement,
                                                       const RecursionOptions &options = {});
// Same bound with blocks read from an existing matrix of the same placement.
std::pair<double, RecursionTrace> recursive_norm_bound(const ChannelMatrix &h, const NodePlacement &placement,
                                                       const RecursionOptions &options = {});

// sqrt(c M^{1+eps} / d); valid for 2 sqrt(M) <= d <= M, window_violation otherwise.
double offdiag_block_bound(double M, double d, double epsilon, double c);
bool offdiag_block_bound_holds(const Eigen::MatrixXcd &block, double M, double d, double epsilon, double c);

struct MomentEstimate
{
    std::size_t ell = 1;
    double trace_value = 0.0;
    double root_value = 0.0;
};

// Tr((F F^H)^ell) by repeated products; root_value = trace^{1/ell} >= ||F||^2.
MomentEstimate trace_moment(const Eigen::MatrixXcd &f, std::size_t ell);

// Two M-node clusters in sqrt(M) x sqrt(M) squares whose centers are d apart
// along x; the block between them. Used by calibration and the block-law check.
Eigen::MatrixXcd random_cluster_pair_block(std::size_t M, double d, std::uint64_t seed,
                                           std::vector<Point> *tx = nullptr, std::vector<Point> *rx = nullptr);

} // namespace bfbf
