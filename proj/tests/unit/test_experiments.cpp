#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bfbf/errors.hpp"
#include "bfbf/experiments.hpp"

using namespace bfbf;
namespace fs = std::filesystem;

namespace
{

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string &name)
{
    const fs::path p = fs::temp_directory_path() / ("bfbf_unit_" + name);
    fs::remove_all(p);
    return p;
}

SweepConfig small_sweep(const fs::path &dir)
{
    SweepConfig c;
    c.n_list = {64, 128, 256};
    c.gamma = 0.5;
    for (std::uint64_t s = 0; s < 10; ++s)
        c.seeds.push_back(s);
    c.methods = {"power_iter"};
    c.output_dir = dir.string();
    c.record_timing = false;
    return c;
}

} // namespace

TEST_CASE("log-log fit recovers exact power laws")
{
    std::vector<double> x{256, 1024, 4096, 16384}, y, flat;
    for (double v : x)
    {
        y.push_back(3.0 * std::sqrt(v));
        flat.push_back(7.0);
    }
    const auto f = fit_loglog(x, y);
    CHECK(std::abs(f.slope - 0.5) < 1e-12);
    CHECK(std::abs(f.intercept - std::log(3.0)) < 1e-12);
    CHECK(f.points == 4);
    CHECK(std::abs(fit_loglog(x, flat).slope) < 1e-12);
    CHECK_THROWS_AS(fit_loglog({1, 2}, {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(fit_loglog({2, 2, 2}, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("scaling fit averages seeds and drops failed rows")
{
    std::vector<SweepRow> rows;
    for (std::size_t n : {100u, 400u, 1600u})
    {
        rows.push_back({n, 0, "m", std::sqrt(static_cast<double>(n)) * 0.5, 0.0, "ok"});
        rows.push_back({n, 1, "m", std::sqrt(static_cast<double>(n)) * 1.5, 0.0, "ok"});
    }
    rows.push_back({6400, 0, "m", -1.0, 0.0, "ok"});
    rows.push_back({6400, 1, "m", 1.0, 0.0, "no_convergence"});
    const auto f = fit_scaling_exponent(rows, "m");
    CHECK(std::abs(f.slope - 0.5) < 1e-12);
    CHECK(f.excluded == 2);
    CHECK(std::abs(fit_scaling_exponent(rows, "m", 2.0).slope - 1.0) < 1e-12);
}

TEST_CASE("config parsing")
{
    const auto j = nlohmann::json::parse(R"({"version": 1, "n_list": [256, 1024, 4096], "gamma": 0.5,
        "seeds": 3, "methods": ["power_iter", "moment_ell2"],
        "checks": [{"method": "power_iter", "power": 2, "slope_min": 0.4, "slope_max": 0.7}]})");
    const auto c = SweepConfig::from_json(j);
    CHECK(c.seeds == std::vector<std::uint64_t>{0, 1, 2});
    CHECK(c.power_for(1) == doctest::Approx(1.0 / 32.0));
    REQUIRE(c.checks.size() == 1);
    CHECK(*c.checks[0].slope_max == 0.7);
    c.validate();

    // Round trip is stable.
    const auto again = SweepConfig::from_json(c.to_json());
    CHECK(again.to_json() == c.to_json());

    auto bad = j;
    bad["nlist"] = {1};
    CHECK_THROWS_AS(SweepConfig::from_json(bad), invalid_config);
    auto nover = j;
    nover.erase("version");
    CHECK_THROWS_AS(SweepConfig::from_json(nover), invalid_config);
    auto nomethods = c;
    nomethods.methods.clear();
    CHECK_THROWS_AS(nomethods.validate(), invalid_config);
    auto unknown = c;
    unknown.methods = {"svd"};
    CHECK_THROWS_AS(unknown.validate(), invalid_config);
    CHECK(is_known_method("moment_ell3"));
    CHECK(!is_known_method("moment_ell"));
    CHECK(!is_known_method("moment_ell0"));
}

TEST_CASE("sweep rows, determinism and resume")
{
    const fs::path dir = scratch("sweep");
    const auto cfg = small_sweep(dir);
    const auto rep = run_sweep(cfg);
    CHECK(rep.rows.size() == 30);
    for (const auto &r : rep.rows)
    {
        CHECK(r.status == "ok");
        CHECK(r.value > 0.0);
    }
    const std::string first = slurp(dir / "sweep.csv");
    CHECK(first.rfind(csv_header() + "\n", 0) == 0);
    CHECK(csv_header() == "n,seed,method,value,wall_time_ms,status");
    CHECK(fs::exists(dir / "fits.csv"));
    CHECK(fs::exists(dir / "norms.svg"));

    // A fresh directory gives identical bytes.
    const fs::path dir2 = scratch("sweep2");
    auto cfg2 = cfg;
    cfg2.output_dir = dir2.string();
    cfg2.threads = 3;
    run_sweep(cfg2);
    CHECK(slurp(dir2 / "sweep.csv") == first);

    // Truncate to a partial run with a torn last line, then resume.
    {
        std::istringstream in(first);
        std::ostringstream part;
        std::string line;
        for (int i = 0; i < 12 && std::getline(in, line); ++i)
            part << line << '\n';
        part << "256,3,power";
        std::ofstream(dir / "sweep.csv", std::ios::trunc) << part.str();
    }
    run_sweep(cfg);
    CHECK(slurp(dir / "sweep.csv") == first);

    const auto read = read_rows_csv(dir / "sweep.csv");
    CHECK(read.size() == 30);
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("failed rows carry a status")
{
    const fs::path dir = scratch("infeasible");
    SweepConfig c;
    c.n_list = {256, 512, 1024};
    c.gamma = 0.5;
    c.seeds = {1};
    c.methods = {"scheme_rate"};
    c.scheme.c2 = 100.0;
    c.output_dir = dir.string();
    c.record_timing = false;
    c.svg = false;
    const auto rep = run_sweep(c);
    REQUIRE(rep.rows.size() == 3);
    for (const auto &r : rep.rows)
        CHECK(r.status == "infeasible");
    CHECK(!rep.all_passed());
    fs::remove_all(dir);
}

TEST_CASE("svg has one polyline per method")
{
    std::vector<SweepRow> rows;
    for (std::size_t n : {64u, 128u, 256u})
    {
        rows.push_back({n, 0, "a", static_cast<double>(n), 0.0, "ok"});
        rows.push_back({n, 0, "b", std::sqrt(static_cast<double>(n)), 0.0, "ok"});
    }
    const std::string svg = render_svg(rows, {"a", "b"}, "t");
    std::size_t count = 0;
    for (std::size_t pos = 0; (pos = svg.find("<polyline", pos)) != std::string::npos; ++pos)
        ++count;
    CHECK(count == 2);
    CHECK(svg.find("data-method=\"a\"") != std::string::npos);
    CHECK(svg.find("data-method=\"b\"") != std::string::npos);
}

TEST_CASE("output directory from the environment")
{
    ::setenv("BFBF_OUT_DIR", "/tmp/bfbf_env_dir", 1);
    CHECK(default_output_dir() == fs::path("/tmp/bfbf_env_dir"));
    ::unsetenv("BFBF_OUT_DIR");
    CHECK(default_output_dir() == fs::path("bfbf_out"));
}
