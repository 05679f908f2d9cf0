#include <doctest.h>

#include <cmath>

#include <Eigen/SVD>

#include "bfbf/core_model.hpp"
#include "bfbf/errors.hpp"
#include "bfbf/spectral.hpp"

using namespace bfbf;

namespace
{

double svd_norm(const Eigen::MatrixXcd &a)
{
    return Eigen::JacobiSVD<Eigen::MatrixXcd>(a).singularValues()(0);
}

} // namespace

TEST_CASE("zero and trivial matrices")
{
    CHECK(spectral_norm(Eigen::MatrixXcd::Zero(5, 5)).value == 0.0);
    const auto p = placement_from_points({{0.0, 0.0}, {2.5, 0.0}});
    const auto r = spectral_norm(build_channel_matrix(p));
    CHECK(r.value == doctest::Approx(1.0 / 2.5).epsilon(1e-12));
}

TEST_CASE("power iteration agrees with a dense SVD")
{
    for (std::uint64_t seed : {1u, 2u, 3u})
    {
        const auto p = place_nodes(NetworkConfig::with_power(8, 1.0, seed));
        const auto h = build_channel_matrix(p);
        const auto r = spectral_norm(h, 1e-12);
        CHECK(r.value == doctest::Approx(svd_norm(h.entries)).epsilon(1e-8));
        CHECK(r.value <= svd_norm(h.entries) * (1.0 + 1e-12));
        CHECK(r.residual <= 1e-12);
    }
    const auto p = place_nodes(NetworkConfig::with_power(256, 1.0, 44));
    const auto h = build_channel_matrix(p);
    CHECK(spectral_norm(h).value == doctest::Approx(svd_norm(h.entries)).epsilon(1e-6));
    CHECK(exact_norm(h.entries) == doctest::Approx(svd_norm(h.entries)).epsilon(1e-12));
}

TEST_CASE("null-space start vector is handled")
{
    Eigen::MatrixXcd a(2, 2);
    a << 1.0, -1.0, 1.0, -1.0;
    CHECK(spectral_norm(a).value == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("iteration cap raises convergence_failure with the best estimate")
{
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(3, 3);
    a(0, 0) = 1.0;
    a(1, 1) = 0.999;
    a(2, 2) = 0.5;
    try
    {
        spectral_norm(a, 1e-15, 2);
        FAIL("expected convergence_failure");
    }
    catch (const convergence_failure &e)
    {
        CHECK(e.iterations == 2);
        CHECK(e.best_estimate > 0.5);
        CHECK(e.best_estimate <= 1.0);
    }
}

TEST_CASE("block Gershgorin special cases")
{
    const auto p = place_nodes(NetworkConfig::with_power(64, 1.0, 13));
    const auto h = build_channel_matrix(p);
    // K = 1: the bound is the norm itself.
    CHECK(block_gershgorin_bound(h, BlockPartition::single_block(64)) ==
          doctest::Approx(svd_norm(h.entries)).epsilon(1e-10));
    // M = 1: max absolute row sum.
    const double rows = h.entries.cwiseAbs().rowwise().sum().maxCoeff();
    CHECK(block_gershgorin_bound(h, BlockPartition::singletons(64)) == doctest::Approx(rows).epsilon(1e-12));
    CHECK(gershgorin_m1_bound(p) == doctest::Approx(rows).epsilon(1e-12));
}

TEST_CASE("block Gershgorin dominates the norm")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed)
    {
        const auto p = place_nodes(NetworkConfig::with_power(256, 1.0, 300 + seed));
        const auto h = build_channel_matrix(p);
        const double norm = svd_norm(h.entries);
        for (double side : {2.0, 4.0, 8.0})
        {
            const auto part = BlockPartition::from_layout(partition_grid(p, side));
            CHECK(block_gershgorin_bound(h, part) >= norm * (1.0 - 1e-10));
        }
    }
}

TEST_CASE("block Gershgorin reports the smallest maximizing block")
{
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(4, 4);
    BlockPartition part = BlockPartition::singletons(4);
    const auto r = block_gershgorin(a, part);
    CHECK(r.value == doctest::Approx(1.0));
    CHECK(r.argmax == 0);
}

TEST_CASE("malformed partitions are rejected")
{
    const Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(4, 4);
    BlockPartition p = BlockPartition::singletons(4);
    p.permutation[1] = 0;
    CHECK_THROWS_AS(block_gershgorin_bound(a, p), invalid_partition);
    BlockPartition q = BlockPartition::singletons(3);
    CHECK_THROWS_AS(block_gershgorin_bound(a, q), invalid_partition);
}

TEST_CASE("exponent map")
{
    CHECK(exponent_map(0.5) == doctest::Approx(3.0 / 8.0).epsilon(1e-15));
    CHECK(exponent_map(3.0 / 8.0) == doctest::Approx(9.0 / 28.0).epsilon(1e-15));
    CHECK(exponent_map(0.25) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK_THROWS(exponent_map(0.2));
    CHECK_THROWS(exponent_map(0.6));
    const auto seq = exponent_sequence(0.5, 61);
    for (std::size_t i = 1; i < seq.size(); ++i)
        CHECK(seq[i] < seq[i - 1]);
    CHECK(std::abs(seq.back() - 0.25) <= 1e-6);
}

TEST_CASE("recursion falls back to row sums when it cannot shrink")
{
    const auto p = place_nodes(NetworkConfig::with_power(64, 1.0, 3));
    RecursionOptions o;
    o.depth = 0;
    CHECK(recursive_norm_bound(p, o).first == doctest::Approx(gershgorin_m1_bound(p)).epsilon(1e-14));
    const auto [v, trace] = recursive_norm_bound(p);
    CHECK(v == doctest::Approx(gershgorin_m1_bound(p)).epsilon(1e-14));
    CHECK(trace.levels_used == 0);
}

TEST_CASE("recursion trace records the exponent sequence")
{
    const auto p = place_nodes(NetworkConfig::with_power(64, 1.0, 3));
    RecursionOptions o;
    o.depth = 3;
    const auto trace = recursive_norm_bound(p, o).second;
    REQUIRE(trace.exponent_sequence.size() == 3);
    CHECK(trace.exponent_sequence[0] == 0.5);
    CHECK(trace.exponent_sequence[1] == doctest::Approx(3.0 / 8.0));
    CHECK(trace.exponent_sequence[2] == doctest::Approx(9.0 / 28.0));
}

TEST_CASE("multi-level recursion stays above the norm")
{
    RecursionOptions o;
    o.area_scale = 1.0 / 16.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed)
    {
        const auto p = place_nodes(NetworkConfig::with_power(1024, 1.0, 900 + seed));
        const auto h = build_channel_matrix(p);
        const auto [v, trace] = recursive_norm_bound(h, p, o);
        CHECK(trace.levels_used >= 2);
        CHECK(trace.window_blocks + trace.measured_blocks > 0);
        CHECK(v >= exact_norm(h.entries));
        // Same bound from geometry and from the stored matrix.
        CHECK(recursive_norm_bound(p, o).first == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("off-diagonal block bound")
{
    CHECK(offdiag_block_bound(100.0, 20.0, 0.0, 1.0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
    CHECK(offdiag_block_bound(100.0, 100.0, 0.0, 4.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(offdiag_block_bound(100.0, 19.9, 0.0, 1.0), window_violation);
    CHECK_THROWS_AS(offdiag_block_bound(100.0, 100.1, 0.0, 1.0), window_violation);
}

TEST_CASE("trace moments")
{
    Eigen::MatrixXcd one(1, 1);
    one(0, 0) = std::complex<double>(0.6, 0.8) * 0.5;
    for (std::size_t ell = 1; ell <= 4; ++ell)
        CHECK(trace_moment(one, ell).trace_value == doctest::Approx(std::pow(0.25, ell)).epsilon(1e-14));
    CHECK_THROWS(trace_moment(one, 0));

    std::vector<Point> tx, rx;
    const auto f = random_cluster_pair_block(64, 24.0, 17, &tx, &rx);
    double s = 0.0;
    for (std::size_t j = 0; j < 64; ++j)
        for (std::size_t k = 0; k < 64; ++k)
        {
            const double r = std::hypot(rx[j].x - tx[k].x, rx[j].y - tx[k].y);
            s += 1.0 / (r * r);
        }
    CHECK(trace_moment(f, 1).trace_value == doctest::Approx(s).epsilon(1e-12));
    const double n2 = std::pow(svd_norm(f), 2);
    double prev = INFINITY;
    for (std::size_t ell = 1; ell <= 4; ++ell)
    {
        const double root = trace_moment(f, ell).root_value;
        CHECK(root <= prev * (1.0 + 1e-12));
        CHECK(root >= n2 * (1.0 - 1e-9));
        prev = root;
    }
}

TEST_CASE("cluster pair geometry")
{
    std::vector<Point> tx, rx;
    random_cluster_pair_block(16, 10.0, 5, &tx, &rx);
    for (const auto &p : tx)
        CHECK(std::max(std::abs(p.x), std::abs(p.y)) <= 2.0);
    for (const auto &p : rx)
    {
        CHECK(std::abs(p.x - 10.0) <= 2.0);
        CHECK(std::abs(p.y) <= 2.0);
    }
}
