#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bfbf/acceptance.hpp"
#include "bfbf/capacity.hpp"
#include "bfbf/core_model.hpp"
#include "bfbf/errors.hpp"
#include "bfbf/experiments.hpp"
#include "bfbf/scheme.hpp"
#include "bfbf/spectral.hpp"

namespace fs = std::filesystem;
using namespace bfbf;

namespace
{

struct Common
{
    std::string config;
    std::string out;
    std::size_t seeds = 0;
    std::vector<std::size_t> n;
    std::size_t threads = 1;
    double gamma = 1.0;
};

fs::path out_dir(const Common &c)
{
    const fs::path p = c.out.empty() ? default_output_dir() : fs::path(c.out);
    fs::create_directories(p);
    return p;
}

struct Asserts
{
    bool ok = true;
    void check(bool cond, const std::string &what)
    {
        std::printf("%s %s\n", cond ? "PASS" : "FAIL", what.c_str());
        ok = ok && cond;
    }
};

double ms_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::size_t> n_or(const Common &c, std::vector<std::size_t> dflt)
{
    return c.n.empty() ? dflt : c.n;
}

std::size_t seeds_or(const Common &c, std::size_t dflt)
{
    return c.seeds ? c.seeds : dflt;
}

int cmd_norm(const Common &c, bool export_files)
{
    Asserts a;
    std::vector<SweepRow> rows;
    const fs::path dir = out_dir(c);
    for (std::size_t n : n_or(c, {256, 1024}))
        for (std::size_t s = 0; s < seeds_or(c, 3); ++s)
        {
            const auto cfg = NetworkConfig::with_gamma(n, c.gamma, s);
            const auto pl = place_nodes(cfg);
            const auto h = build_channel_matrix(pl);
            const auto t0 = std::chrono::steady_clock::now();
            SweepRow r{n, s, "power_iter", 0.0, 0.0, "ok"};
            try
            {
                const auto res = spectral_norm(h);
                r.value = res.value;
                std::printf("n=%zu seed=%zu ||H||=%.10g ||H||^2=%.6g iterations=%zu\n", n, s, res.value,
                            res.value * res.value, res.iterations);
            }
            catch (const convergence_failure &e)
            {
                r.value = e.best_estimate;
                r.status = "no_convergence";
            }
            r.wall_time_ms = ms_since(t0);
            a.check(r.status == "ok", "power iteration converged n=" + std::to_string(n) + " seed=" + std::to_string(s));
            rows.push_back(r);
            if (export_files && s == 0)
            {
                std::ofstream pcsv(dir / ("placement_n" + std::to_string(n) + ".csv"));
                write_placement_csv(pl, pcsv);
                std::ofstream bin(dir / ("matrix_n" + std::to_string(n) + ".c64"), std::ios::binary);
                write_matrix_binary(h, bin);
            }
        }
    write_rows_csv(rows, dir / "norm.csv");
    return a.ok ? 0 : 1;
}

int cmd_bounds(const Common &c)
{
    Asserts a;
    std::vector<SweepRow> rows;
    for (std::size_t n : n_or(c, {256, 1024}))
        for (std::size_t s = 0; s < seeds_or(c, 3); ++s)
        {
            const auto cfg = NetworkConfig::with_gamma(n, c.gamma, s);
            const auto pl = place_nodes(cfg);
            const auto h = build_channel_matrix(pl);
            auto timed = [&](const std::string &m, auto f) {
                const auto t0 = std::chrono::steady_clock::now();
                const double v = f();
                rows.push_back({n, s, m, v, ms_since(t0), "ok"});
                return v;
            };
            const double norm = timed("power_iter", [&] { return spectral_norm(h).value; });
            const double m1 = timed("gershgorin_M1", [&] { return gershgorin_m1_bound(pl); });
            const double gb = timed("gershgorin_block", [&] {
                return block_gershgorin_bound(h, BlockPartition::from_layout(partition_grid(pl, pl.side() / 4.0)));
            });
            const double rec = timed("recursive", [&] { return recursive_norm_bound(h, pl).first; });
            std::printf("n=%zu seed=%zu norm=%.6g M1=%.6g block=%.6g recursive=%.6g", n, s, norm, m1, gb, rec);
            const std::string tag = " n=" + std::to_string(n) + " seed=" + std::to_string(s);
            if (n <= 2048)
            {
                for (std::size_t ell = 1; ell <= 4; ++ell)
                {
                    const double v = timed("moment_ell" + std::to_string(ell),
                                           [&] { return std::sqrt(trace_moment(h.entries, ell).root_value); });
                    std::printf(" ell%zu=%.6g", ell, v);
                    a.ok = a.ok && v >= norm * (1.0 - 1e-6);
                }
            }
            std::printf("\n");
            a.check(m1 >= norm * (1.0 - 1e-6), "gershgorin_M1 >= norm" + tag);
            a.check(gb >= norm * (1.0 - 1e-6), "gershgorin_block >= norm" + tag);
            a.check(rec >= norm * (1.0 - 1e-6), "recursive >= norm" + tag);
        }
    write_rows_csv(rows, out_dir(c) / "bounds.csv");
    return a.ok ? 0 : 1;
}

int cmd_scheme(const Common &c, const SchemeParams &sp)
{
    Asserts a;
    std::vector<SweepRow> rows;
    const fs::path dir = out_dir(c);
    for (std::size_t n : n_or(c, {4096}))
        for (std::size_t s = 0; s < seeds_or(c, 2); ++s)
        {
            const auto cfg = NetworkConfig::with_gamma(n, c.gamma, s);
            const auto pl = place_nodes(cfg);
            const auto t0 = std::chrono::steady_clock::now();
            const auto res = measure_scheme_rate(cfg, sp, pl);
            const double ms = ms_since(t0);
            const auto &r = res.report;
            const auto &sch = res.schedule;
            std::printf("n=%zu seed=%zu t=%zu tau=%zu A=%.4g burst=%.4g rate=%.4g optimistic=%.4g tdma=%.4g "
                        "upper=%.4g%s min_sinr=%.4g decodable=%.2f max_noise=%.4g power=%.4g/P\n",
                        n, s, sch.t, sch.tau, sch.amplification, sch.burst_power, r.scheme_rate,
                        r.scheme_rate_optimistic, r.tdma_rate, r.upper_bound, res.norm_is_lower_bound ? "(floor)" : "",
                        res.min_sinr, res.decodable_fraction, res.max_noise_power, res.average_power / cfg.power);
            const std::string ub_status = res.norm_is_lower_bound ? "lower_bound" : "ok";
            rows.push_back({n, s, "scheme_rate", r.scheme_rate, ms, "ok"});
            rows.push_back({n, s, "scheme_rate_optimistic", r.scheme_rate_optimistic, 0.0, "ok"});
            rows.push_back({n, s, "tdma_rate", r.tdma_rate, 0.0, "ok"});
            rows.push_back({n, s, "upper_bound", r.upper_bound, 0.0, ub_status});
            std::ofstream tr(dir / ("trace_n" + std::to_string(n) + "_seed" + std::to_string(s) + ".csv"));
            write_trace_csv(res.traces.front(), tr);

            const std::string tag = " n=" + std::to_string(n) + " seed=" + std::to_string(s);
            a.check(res.min_sinr >= sp.theta, "final SINR >= theta" + tag);
            a.check(res.max_noise_power <= 4.0 * static_cast<double>(sch.t + 1), "noise <= 4(t+1)" + tag);
            a.check(res.average_power <= cfg.power * (1.0 + 1e-9), "average power <= P" + tag);
            a.check(r.scheme_rate <= r.upper_bound, "scheme rate <= P||H||^2" + tag);
            a.check(r.tdma_rate <= r.upper_bound, "tdma rate <= P||H||^2" + tag);
        }
    write_rows_csv(rows, dir / "scheme.csv");
    return a.ok ? 0 : 1;
}

int cmd_verify(const Common &c)
{
    bool ok = true;
    AcceptanceOptions opt;
    opt.seeds = c.seeds;
    for (const char *id : {"C3", "C4", "C5", "C6", "C7", "C10"})
    {
        const auto r = run_criterion(id, opt);
        std::printf("%s\n", r.line().c_str());
        for (const auto &d : r.diagnostics)
            std::printf("    note: %s\n", d.c_str());
        ok = ok && r.passed;
    }
    return ok ? 0 : 1;
}

SweepConfig load_sweep(const Common &c)
{
    if (c.config.empty())
        throw invalid_config("--config is required");
    SweepConfig cfg = SweepConfig::load(c.config);
    if (!c.out.empty())
        cfg.output_dir = c.out;
    if (cfg.output_dir.empty())
        cfg.output_dir = default_output_dir().string();
    if (c.seeds)
    {
        cfg.seeds.clear();
        for (std::size_t i = 0; i < c.seeds; ++i)
            cfg.seeds.push_back(i);
    }
    if (!c.n.empty())
        cfg.n_list = c.n;
    if (c.threads > 1)
        cfg.threads = c.threads;
    cfg.validate();
    return cfg;
}

int print_report(const ScalingReport &rep)
{
    for (const auto &[m, f] : rep.fits)
        std::printf("fit %-24s slope=%.4f stderr=%.4f points=%zu excluded=%zu\n", m.c_str(), f.slope, f.stderr_slope,
                    f.points, f.excluded);
    for (const auto &ch : rep.checks)
        std::printf("%s %s %s\n", ch.passed ? "PASS" : "FAIL", ch.name.c_str(), ch.detail.c_str());
    return rep.all_passed() ? 0 : 1;
}

int cmd_sweep(const Common &c)
{
    const SweepConfig cfg = load_sweep(c);
    const auto rep = run_sweep(cfg);
    std::printf("wrote %s\n", (fs::path(cfg.output_dir) / "sweep.csv").string().c_str());
    return print_report(rep);
}

int cmd_report(const Common &c, const std::string &input)
{
    SweepConfig cfg;
    if (!c.config.empty())
        cfg = load_sweep(c);
    const fs::path dir = c.out.empty() ? (cfg.output_dir.empty() ? default_output_dir() : fs::path(cfg.output_dir))
                                       : fs::path(c.out);
    const fs::path in = input.empty() ? dir / "sweep.csv" : fs::path(input);
    const auto rep = build_report(cfg, read_rows_csv(in));
    emit_report(rep, dir, true);
    std::printf("report written to %s\n", dir.string().c_str());
    return print_report(rep);
}

void add_common(CLI::App *sub, Common &c)
{
    sub->add_option("--config", c.config, "JSON config path");
    sub->add_option("--out", c.out, "output directory (default: $BFBF_OUT_DIR or ./bfbf_out)");
    sub->add_option("--seeds", c.seeds, "number of seeds (0 = command default)");
    sub->add_option("--n", c.n, "node counts")->delimiter(',');
    sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Back-and-forth beamforming simulator and spectral bound toolkit"};
    app.require_subcommand(1);
    Common c;
    SchemeParams sp;
    bool export_files = false;
    std::string input;

    auto *norm = app.add_subcommand("norm", "spectral norm of H by power iteration");
    add_common(norm, c);
    norm->add_option("--gamma", c.gamma, "P = n^-gamma");
    norm->add_flag("--export", export_files, "write placement CSV and complex64 matrix dump for seed 0");

    auto *bounds = app.add_subcommand("bounds", "norm bounds and their soundness");
    add_common(bounds, c);

    auto *scheme = app.add_subcommand("scheme", "simulate the two-phase scheme");
    add_common(scheme, c);
    scheme->add_option("--gamma", c.gamma, "P = n^-gamma");
    scheme->add_option("--c1", sp.c1);
    scheme->add_option("--c2", sp.c2);
    scheme->add_option("--epsilon", sp.epsilon);
    scheme->add_option("--t", sp.t, "back-and-forth rounds (0 = automatic)");
    scheme->add_option("--sources", sp.sources);

    auto *verify = app.add_subcommand("verify-lemmas", "check the lemma-level properties");
    add_common(verify, c);

    auto *sweep = app.add_subcommand("sweep", "run a configured sweep");
    add_common(sweep, c);

    auto *report = app.add_subcommand("report", "fit exponents and emit CSV/SVG from a sweep CSV");
    add_common(report, c);
    report->add_option("--in", input, "sweep CSV (default: <out>/sweep.csv)");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*norm)
            return cmd_norm(c, export_files);
        if (*bounds)
            return cmd_bounds(c);
        if (*scheme)
        {
            if (!c.config.empty())
            {
                // Explicit flags take precedence over the config file.
                SchemeParams file = SweepConfig::load(c.config).scheme;
                if (!scheme->count("--c1"))
                    sp.c1 = file.c1;
                if (!scheme->count("--c2"))
                    sp.c2 = file.c2;
                if (!scheme->count("--epsilon"))
                    sp.epsilon = file.epsilon;
                if (!scheme->count("--t"))
                    sp.t = file.t;
                if (!scheme->count("--sources"))
                    sp.sources = file.sources;
                sp.tau = file.tau;
                sp.amplification = file.amplification;
                sp.theta = file.theta;
                sp.burst_kappa = file.burst_kappa;
                sp.design_sinr = file.design_sinr;
                sp.noise_realizations = file.noise_realizations;
                sp.phase_compensation = file.phase_compensation;
            }
            return cmd_scheme(c, sp);
        }
        if (*verify)
            return cmd_verify(c);
        if (*sweep)
            return cmd_sweep(c);
        if (*report)
            return cmd_report(c, input);
    }
    catch (const std::exception &e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
