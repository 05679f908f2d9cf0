#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <set>
#include <sstream>

#include "bfbf/core_model.hpp"
#include "bfbf/errors.hpp"

using namespace bfbf;

TEST_CASE("config validation")
{
    CHECK_THROWS_AS(NetworkConfig::with_power(0, 1.0, 0).validate(), invalid_config);
    CHECK_THROWS_AS(NetworkConfig::with_power(16, 0.0, 0).validate(), invalid_config);
    CHECK_THROWS_AS(NetworkConfig::with_power(16, -1.0, 0).validate(), invalid_config);
    const auto c = NetworkConfig::with_gamma(1024, 0.5, 3);
    CHECK(c.power == doctest::Approx(1.0 / 32.0).epsilon(1e-14));
    CHECK(c.gamma.has_value());
}

TEST_CASE("placement is deterministic and inside the square")
{
    const auto cfg = NetworkConfig::with_power(4, 1.0, 11);
    const auto a = place_nodes(cfg);
    const auto b = place_nodes(cfg);
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
    {
        CHECK(a.positions[i].x == b.positions[i].x);
        CHECK(a.positions[i].y == b.positions[i].y);
        CHECK(a.positions[i].x >= 0.0);
        CHECK(a.positions[i].x < 2.0);
        CHECK(a.positions[i].y >= 0.0);
        CHECK(a.positions[i].y < 2.0);
    }
    const auto other = place_nodes(NetworkConfig::with_power(4, 1.0, 12));
    CHECK(other.positions[0].x != a.positions[0].x);
}

TEST_CASE("placement mean matches uniform law")
{
    const std::size_t n = 1024, seeds = 200;
    double sx = 0.0, sy = 0.0;
    for (std::size_t s = 0; s < seeds; ++s)
    {
        const auto p = place_nodes(NetworkConfig::with_power(n, 1.0, 500 + s));
        for (const auto &q : p.positions)
        {
            sx += q.x;
            sy += q.y;
        }
    }
    const double N = static_cast<double>(n * seeds);
    // Var of U(0, 32) is 32^2/12; allow 4 standard errors.
    const double tol = 4.0 * 32.0 / std::sqrt(12.0) / std::sqrt(N);
    CHECK(std::abs(sx / N - 16.0) < tol);
    CHECK(std::abs(sy / N - 16.0) < tol);
}

TEST_CASE("pairwise distance")
{
    const auto p = placement_from_points({{0.0, 0.0}, {3.0, 4.0}});
    CHECK(pairwise_distance(p, 0, 1) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(pairwise_distance(p, 1, 0) == pairwise_distance(p, 0, 1));
    CHECK(pairwise_distance(p, 0, 0) == 0.0);
    const auto r = place_nodes(NetworkConfig::with_power(256, 1.0, 9));
    for (std::size_t k = 1; k < 256; ++k)
        CHECK(pairwise_distance(r, 0, k) <= std::sqrt(2.0 * 256.0));
}

TEST_CASE("line-of-sight gain")
{
    const auto g1 = los_gain(1.0);
    CHECK(g1.real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(g1.imag()) < 1e-15);
    const auto gh = los_gain(0.5);
    CHECK(std::abs(gh) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(std::abs(std::abs(std::arg(gh)) - std::numbers::pi) < 1e-12);
    // Large distance: phase reduction keeps full accuracy.
    const auto gl = los_gain(1e6 + 0.25);
    CHECK(std::abs(gl.real()) < 1e-15);
    CHECK(gl.imag() > 0.0);
}

TEST_CASE("channel matrix structure")
{
    const auto p = place_nodes(NetworkConfig::with_power(128, 1.0, 21));
    const auto h = build_channel_matrix(p);
    REQUIRE(h.n() == 128);
    double max_abs = 0.0;
    for (Eigen::Index j = 0; j < 128; ++j)
    {
        CHECK(h.entries(j, j) == std::complex<double>(0.0, 0.0));
        for (Eigen::Index k = 0; k < 128; ++k)
        {
            CHECK(h.entries(j, k) == h.entries(k, j));
            if (j == k)
                continue;
            const double r = pairwise_distance(p, static_cast<std::size_t>(j), static_cast<std::size_t>(k));
            CHECK(std::abs(std::abs(h.entries(j, k)) * r - 1.0) < 1e-12);
            max_abs = std::max(max_abs, std::abs(h.entries(j, k)));
        }
    }
    CHECK(max_abs == doctest::Approx(1.0 / min_pairwise_distance(p)).epsilon(1e-12));

    const auto h2 = build_channel_matrix(p);
    CHECK((h.entries.array() == h2.entries.array()).all());
}

TEST_CASE("coincident nodes are rejected")
{
    const auto p = placement_from_points({{0.5, 0.5}, {0.5, 0.5}, {1.0, 1.5}});
    try
    {
        build_channel_matrix(p);
        FAIL("expected degenerate_placement");
    }
    catch (const degenerate_placement &e)
    {
        CHECK(e.j == 0);
        CHECK(e.k == 1);
    }
}

TEST_CASE("channel block matches matrix entries")
{
    const auto p = place_nodes(NetworkConfig::with_power(64, 1.0, 5));
    const auto h = build_channel_matrix(p);
    const std::vector<std::size_t> rows{3, 7, 11}, cols{7, 40};
    const auto b = channel_block(p, rows, cols);
    CHECK(b(1, 0) == std::complex<double>(0.0, 0.0));
    CHECK(b(0, 1) == h.entries(3, 40));
    CHECK(b(2, 0) == h.entries(11, 7));
}

TEST_CASE("partition into a single cluster")
{
    const auto p = place_nodes(NetworkConfig::with_power(64, 1.0, 1));
    const auto L = partition_grid(p, 8.0);
    CHECK(L.cluster_count() == 1);
    CHECK(L.members[0].size() == 64);
}

TEST_CASE("partition of a 4x4 square into 2x2 cells")
{
    const auto p = place_nodes(NetworkConfig::with_power(16, 1.0, 2));
    const auto L = partition_grid(p, 2.0);
    CHECK(L.cluster_count() == 4);
    CHECK(L.distances(0, 1) == doctest::Approx(2.0));
    CHECK(L.distances(0, 3) == doctest::Approx(std::sqrt(8.0)));
    std::size_t total = 0;
    for (const auto &m : L.members)
        total += m.size();
    CHECK(total == 16);
    CHECK_THROWS_AS(partition_grid(p, 0.0), invalid_partition);
    CHECK_THROWS_AS(partition_grid(p, 5.0), invalid_partition);
}

TEST_CASE("partition boundaries are half-open")
{
    // 16 nodes: side 4, 2x2 cells of side 2.
    std::vector<Point> pts{{2.0, 0.5}, {1.999, 0.5}, {3.5, 3.9}, {0.1, 2.0}};
    for (int i = 0; i < 12; ++i)
        pts.push_back({0.25 + 0.3 * i, 0.1 + 0.25 * i});
    const auto p = placement_from_points(pts);
    const auto L = partition_grid(p, 2.0);
    CHECK(L.membership[0] == 1);
    CHECK(L.membership[1] == 0);
    CHECK(L.membership[2] == 3);
    CHECK(L.membership[3] == 2);
}

TEST_CASE("ragged partition absorbs the remainder")
{
    const auto p = place_nodes(NetworkConfig::with_power(100, 1.0, 8));
    const auto L = partition_grid(p, 3.0);
    CHECK(L.grid_cols == 3);
    CHECK(L.grid_rows == 3);
    std::set<std::size_t> seen;
    for (std::size_t j = 0; j < L.cluster_count(); ++j)
        for (std::size_t i : L.members[j])
        {
            CHECK(L.membership[i] == j);
            seen.insert(i);
        }
    CHECK(seen.size() == 100);
}

TEST_CASE("near and far sets")
{
    const auto p = place_nodes(NetworkConfig::with_power(1024, 1.0, 4));
    const auto L = partition_grid(p, 4.0);
    REQUIRE(L.cluster_count() == 64);
    for (std::size_t j = 0; j < 64; ++j)
    {
        const auto R = L.near_set(j);
        CHECK(R.size() <= 9);
        CHECK(R.size() + L.far_set(j).size() == 64);
    }
    CHECK(L.near_set(0).size() == 4);
    CHECK(L.near_set(9).size() == 9);
}

TEST_CASE("Chernoff exponent and occupancy bound")
{
    CHECK(delta_plus(1.0) == doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-14));
    CHECK(delta_plus(0.0) == 0.0);
    CHECK(occupancy_bound(4096, 64.0, 1e-12) == doctest::Approx(64.0).epsilon(1e-9));
    CHECK(occupancy_bound(4096, 64.0, 0.5) < 1.0);
    CHECK_THROWS(occupancy_check(NetworkConfig::with_power(64, 1.0, 0), 16.0, 0.5, 0));
}

TEST_CASE("occupancy frequency stays under the bound")
{
    const auto rep = occupancy_check(NetworkConfig::with_power(4096, 1.0, 321), 64.0, 0.5, 100);
    CHECK(rep.trials == 100);
    CHECK(rep.violation_frequency <= rep.bound);
}

TEST_CASE("minimum pairwise distance matches brute force")
{
    const auto p = place_nodes(NetworkConfig::with_power(500, 1.0, 77));
    double best = INFINITY;
    for (std::size_t j = 0; j < 500; ++j)
        for (std::size_t k = j + 1; k < 500; ++k)
            best = std::min(best, pairwise_distance(p, j, k));
    CHECK(min_pairwise_distance(p) == best);
}

TEST_CASE("placement and matrix export")
{
    const auto p = placement_from_points({{0.0, 0.0}, {1.0, 0.0}});
    std::ostringstream csv;
    write_placement_csv(p, csv);
    CHECK(csv.str().rfind("index,x,y\n", 0) == 0);

    std::ostringstream bin;
    write_matrix_binary(build_channel_matrix(p), bin);
    const std::string s = bin.str();
    REQUIRE(s.size() == 4 * 8);
    // Entry (0,1) = 1 + 0i as little-endian float32 pairs.
    float re = 0.0f;
    std::memcpy(&re, s.data() + 8, 4);
    CHECK(re == 1.0f);
}
