#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "bfbf/errors.hpp"
#include "bfbf/scheme.hpp"

using namespace bfbf;

TEST_CASE("pair layout dimensions at n = 65536")
{
    const auto cfg = NetworkConfig::with_power(65536, 1.0 / 65536.0, 1);
    const auto p = place_nodes(cfg);
    SchemeParams sp;
    const auto L = build_pair_layout(cfg, sp, p);
    CHECK(L.width == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(L.length == doctest::Approx(64.0).epsilon(1e-14));
    CHECK(L.d == doctest::Approx(64.0).epsilon(1e-14));
    CHECK(L.vertical_gap == doctest::Approx(std::pow(65536.0, 0.3)).epsilon(1e-14));
    CHECK(L.vertical_gap == doctest::Approx(27.857618).epsilon(1e-7));
    CHECK(L.M == doctest::Approx(256.0));
    CHECK(L.pair_count == 8);
    CHECK(L.rounds_to_serve_all == 32);

    std::vector<int> owner(p.size(), -1);
    for (std::size_t i = 0; i < L.pair_count; ++i)
    {
        for (std::size_t k : L.tx[i])
        {
            CHECK(owner[k] == -1);
            owner[k] = 1;
            CHECK(p.positions[k].x < L.length);
        }
        for (std::size_t k : L.rx[i])
        {
            CHECK(owner[k] == -1);
            owner[k] = 2;
            CHECK(p.positions[k].x >= L.length + L.d);
        }
        // Occupancy near the nominal M.
        CHECK(L.tx[i].size() > 128);
        CHECK(L.tx[i].size() < 512);
    }
}

TEST_CASE("infeasible and invalid layouts")
{
    SchemeParams sp;
    sp.c2 = 100.0;
    const auto cfg = NetworkConfig::with_power(256, 1.0, 1);
    try
    {
        build_pair_layout(cfg, sp, place_nodes(cfg));
        FAIL("expected layout_infeasible");
    }
    catch (const layout_infeasible &e)
    {
        CHECK(e.min_feasible_n > 256);
        CHECK(pair_count_for(e.min_feasible_n, sp) >= 1);
        CHECK(pair_count_for(e.min_feasible_n - 1, sp) == 0);
    }
    SchemeParams bad;
    bad.c1 = 1.4;
    CHECK_THROWS_AS(bad.validate(), invalid_config);
}

TEST_CASE("phase-1 broadcast SNR")
{
    const auto p = placement_from_points({{0.0, 0.0}, {1.0, 0.0}, {0.0, 2.0}});
    const auto cfg = NetworkConfig::with_power(3, 1.0, 0);
    const auto r = phase1_broadcast(cfg, p, 0, 1.0);
    CHECK(std::isinf(r.snr[0]));
    CHECK(r.snr[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.snr[2] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(r.min_snr == doctest::Approx(0.25));
    CHECK(r.argmin == 2);

    const auto big = NetworkConfig::with_power(1024, 1.0 / 1024.0, 3);
    const auto q = place_nodes(big);
    const auto b = phase1_broadcast(big, q, 5, 1024.0 * big.power);
    CHECK(b.min_snr >= big.power / 2.0);
}

TEST_CASE("coherent gain")
{
    // One transmitter at its facing edge: |gain| = 1/r.
    const auto p = placement_from_points({{0.0, 0.0}, {7.3, 0.0}});
    CHECK(std::abs(coherent_gain(p, {0}, 1, 0.0)) == doctest::Approx(1.0 / 7.3).epsilon(1e-14));

    // Collinear transmitters behind the edge add up exactly in phase.
    const auto q = placement_from_points({{0.0, 0.0}, {-0.37, 0.0}, {-1.91, 0.0}, {10.0, 0.0}});
    const auto g = coherent_gain(q, {0, 1, 2}, 3, 0.0);
    CHECK(std::abs(g) == doctest::Approx(1.0 / 10.0 + 1.0 / 10.37 + 1.0 / 11.91).epsilon(1e-12));

    std::size_t good = 0;
    double comp = 0.0, unc = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s)
    {
        const auto t = gain_trial(64, 64.0, 2.0, 123 + s);
        good += t.compensated >= std::cos(std::numbers::pi / 4.0) / 3.0;
        CHECK(t.compensated <= 1.0 + 1e-12);
        comp += t.compensated;
        unc += t.uncompensated;
    }
    CHECK(good >= 19);
    CHECK(comp > 3.0 * unc);
}

TEST_CASE("single pair has no interference")
{
    SchemeParams sp;
    sp.c2 = 3.0;
    const auto cfg = NetworkConfig::with_power(4096, 1.0 / 4096.0, 2);
    const auto p = place_nodes(cfg);
    const auto L = build_pair_layout(cfg, sp, p);
    REQUIRE(L.pair_count == 1);
    for (std::size_t j : L.rx[0])
        CHECK(interference_at(L, j, p) == std::complex<double>(0.0, 0.0));
}

TEST_CASE("amplification and tau")
{
    CHECK(compute_amplification(16.0, 32.0, 1.0, 3) == doctest::Approx(0.5).epsilon(1e-15));
    const double snr = 1.0 / 8192.0;
    for (std::size_t t : {1u, 4u, 20u})
    {
        const double A = compute_amplification(16.0, 32.0, snr, t);
        CHECK(std::pow(A * 32.0 / 16.0, 2.0 * static_cast<double>(t)) * snr == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS(compute_amplification(16.0, 32.0, 0.0, 1));
    CHECK_THROWS(compute_amplification(16.0, 32.0, 1.0, 0));

    // ceil(4 * 16^2 / (4096 * 32 / 4096) * 8192^(1/20)) = ceil(50.2134)
    CHECK(compute_tau(4, 16.0, 32.0, 4096, 1.0 / 4096.0, snr, 20) == 51);
    CHECK(compute_tau(1, 1.0, 1e6, 1, 1.0, 1.0, 1) == 1);
}

TEST_CASE("default round count")
{
    CHECK(default_round_count(2.0, 4096, 0.05) == 1);
    CHECK(default_round_count(1.0, 4096, 0.05) == 1);
    const double snr = std::pow(4096.0, -0.1);
    CHECK(default_round_count(snr, 4096, 0.05) == 2);
    CHECK(default_round_count(snr * 0.99, 4096, 0.05) == 3);
}

TEST_CASE("back-and-forth run")
{
    const auto cfg = NetworkConfig::with_power(4096, 1.0 / 4096.0, 80000);
    const auto p = place_nodes(cfg);
    SchemeParams sp;
    sp.noise_realizations = 8;
    const auto L = build_pair_layout(cfg, sp, p);
    const auto sch = design_schedule(cfg, sp, L, p);
    CHECK(sch.t >= 1);
    CHECK(sch.amplification > 0.0);
    CHECK(sch.tau >= 1);
    CHECK(average_power_per_node(sch, L, cfg) <= cfg.power * (1.0 + 1e-9));

    const auto tr = run_back_and_forth(cfg, sp, L, p, sch, 7);
    REQUIRE(tr.rounds.size() == sch.t);
    for (std::size_t i = 0; i < tr.rounds.size(); ++i)
    {
        CHECK(tr.rounds[i].round == i + 1);
        CHECK(tr.rounds[i].direction == (i % 2 == 0 ? "forward" : "backward"));
        CHECK(std::isfinite(tr.rounds[i].signal_power));
    }
    CHECK(tr.max_noise_power <= 4.0 * static_cast<double>(sch.t + 1));

    const auto again = run_back_and_forth(cfg, sp, L, p, sch, 7);
    CHECK(again.final_min_sinr == tr.final_min_sinr);
    CHECK(again.bits == tr.bits);

    std::ostringstream os;
    write_trace_csv(tr, os);
    CHECK(os.str().rfind("round,direction,signal_power,interference_power,noise_power,min_snr\n", 0) == 0);

    SchemeSchedule bad = sch;
    bad.amplification = 0.0;
    CHECK_THROWS(run_back_and_forth(cfg, sp, L, p, bad, 7));
}

TEST_CASE("forced two rounds run forward then backward")
{
    const auto cfg = NetworkConfig::with_power(4096, 1.0 / 4096.0, 5);
    const auto p = place_nodes(cfg);
    SchemeParams sp;
    sp.noise_realizations = 4;
    sp.t = 2;
    const auto L = build_pair_layout(cfg, sp, p);
    const auto sch = design_schedule(cfg, sp, L, p);
    CHECK(sch.t == 2);
    const auto tr = run_back_and_forth(cfg, sp, L, p, sch, 0);
    REQUIRE(tr.rounds.size() == 2);
    CHECK(tr.rounds[0].direction == "forward");
    CHECK(tr.rounds[1].direction == "backward");
}

TEST_CASE("scheme rate respects the sandwich")
{
    const auto cfg = NetworkConfig::with_power(4096, 1.0 / 4096.0, 80001);
    const auto p = place_nodes(cfg);
    SchemeParams sp;
    sp.noise_realizations = 8;
    sp.sources = 4;
    const auto r = measure_scheme_rate(cfg, sp, p);
    CHECK(r.traces.size() == 4);
    CHECK(r.report.scheme_rate > 0.0);
    CHECK(r.report.scheme_rate <= r.report.scheme_rate_optimistic);
    CHECK(r.report.scheme_rate <= r.report.upper_bound);
    CHECK(r.report.tdma_rate <= r.report.upper_bound);
    CHECK(!r.norm_is_lower_bound);
    CHECK(r.average_power <= cfg.power * (1.0 + 1e-9));
}
