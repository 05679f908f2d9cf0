#include "bfbf/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bfbf/errors.hpp"
#include "bfbf/spectral.hpp"

namespace bfbf
{

using nlohmann::json;
namespace fs = std::filesystem;

namespace
{

const std::vector<std::string> kPlainMethods = {"power_iter",  "gershgorin_M1", "gershgorin_block",
                                                "recursive",   "upper_bound",   "tdma_rate",
                                                "scheme_rate", "scheme_rate_optimistic"};

std::optional<std::size_t> moment_order(const std::string &m)
{
    const std::string p = "moment_ell";
    if (m.rfind(p, 0) != 0 || m.size() == p.size())
        return std::nullopt;
    const std::string tail = m.substr(p.size());
    if (!std::all_of(tail.begin(), tail.end(), [](char c) { return c >= '0' && c <= '9'; }))
        return std::nullopt;
    const auto k = std::stoul(tail);
    if (k < 1)
        return std::nullopt;
    return k;
}

void reject_unknown(const json &j, const std::set<std::string> &allowed, const std::string &where)
{
    if (!j.is_object())
        throw invalid_config(where + " must be a JSON object");
    for (const auto &[k, v] : j.items())
        if (!allowed.count(k))
            throw invalid_config("unknown key '" + k + "' in " + where);
}

SchemeParams scheme_from_json(const json &j)
{
    reject_unknown(j,
                   {"c1", "c2", "epsilon", "t", "tau", "amplification", "theta", "burst_kappa", "design_sinr",
                    "noise_realizations", "sources", "phase_compensation"},
                   "scheme");
    SchemeParams p;
    p.c1 = j.value("c1", p.c1);
    p.c2 = j.value("c2", p.c2);
    p.epsilon = j.value("epsilon", p.epsilon);
    p.t = j.value("t", p.t);
    p.tau = j.value("tau", p.tau);
    p.amplification = j.value("amplification", p.amplification);
    p.theta = j.value("theta", p.theta);
    p.burst_kappa = j.value("burst_kappa", p.burst_kappa);
    p.design_sinr = j.value("design_sinr", p.design_sinr);
    p.noise_realizations = j.value("noise_realizations", p.noise_realizations);
    p.sources = j.value("sources", p.sources);
    p.phase_compensation = j.value("phase_compensation", p.phase_compensation);
    return p;
}

json scheme_to_json(const SchemeParams &p)
{
    return json{{"c1", p.c1},
                {"c2", p.c2},
                {"epsilon", p.epsilon},
                {"t", p.t},
                {"tau", p.tau},
                {"amplification", p.amplification},
                {"theta", p.theta},
                {"burst_kappa", p.burst_kappa},
                {"design_sinr", p.design_sinr},
                {"noise_realizations", p.noise_realizations},
                {"sources", p.sources},
                {"phase_compensation", p.phase_compensation}};
}

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

double elapsed_ms(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

bool is_known_method(const std::string &method)
{
    return std::find(kPlainMethods.begin(), kPlainMethods.end(), method) != kPlainMethods.end() ||
           moment_order(method).has_value();
}

double SweepConfig::power_for(std::size_t n_index) const
{
    if (gamma)
        return std::pow(static_cast<double>(n_list.at(n_index)), -*gamma);
    if (P_list.size() == 1)
        return P_list[0];
    return P_list.at(n_index);
}

void SweepConfig::validate() const
{
    if (version != kConfigVersion)
        throw invalid_config("unsupported config version " + std::to_string(version));
    if (n_list.empty())
        throw invalid_config("n_list is empty");
    if (seeds.empty())
        throw invalid_config("seeds is empty");
    if (methods.empty())
        throw invalid_config("methods list is empty");
    for (const auto &m : methods)
        if (!is_known_method(m))
            throw invalid_config("unknown method '" + m + "'");
    if (gamma && !P_list.empty())
        throw invalid_config("give either gamma or P_list, not both");
    if (!gamma && P_list.empty())
        throw invalid_config("one of gamma or P_list is required");
    if (!P_list.empty() && P_list.size() != 1 && P_list.size() != n_list.size())
        throw invalid_config("P_list must have one entry or one per n");
    for (double p : P_list)
        if (!(p > 0.0))
            throw invalid_config("powers must be positive");
    for (std::size_t n : n_list)
        if (n < 2)
            throw invalid_config("every n must be at least 2");
    const bool uses_scheme = std::any_of(methods.begin(), methods.end(), [](const std::string &m) {
        return m == "scheme_rate" || m == "scheme_rate_optimistic" || m == "tdma_rate";
    });
    if (uses_scheme)
    {
        for (std::size_t n : n_list)
            if (n < 256)
                throw invalid_config("scheme methods need n >= 256");
        scheme.validate();
    }
    if (threads == 0)
        throw invalid_config("threads must be positive");
    if (blocks_per_side == 0)
        throw invalid_config("blocks_per_side must be positive");
    for (const auto &c : checks)
        if (!is_known_method(c.method))
            throw invalid_config("check refers to unknown method '" + c.method + "'");
}

SweepConfig SweepConfig::from_json(const json &j)
{
    reject_unknown(j,
                   {"version", "n_list", "gamma", "P_list", "seeds", "scheme", "methods", "output_dir",
                    "record_timing", "svg", "threads", "blocks_per_side", "checks"},
                   "sweep config");
    SweepConfig c;
    if (!j.contains("version"))
        throw invalid_config("config needs an explicit version");
    c.version = j.at("version").get<int>();
    c.n_list = j.value("n_list", std::vector<std::size_t>{});
    if (j.contains("gamma"))
        c.gamma = j.at("gamma").get<double>();
    c.P_list = j.value("P_list", std::vector<double>{});
    if (j.contains("seeds"))
    {
        const auto &s = j.at("seeds");
        if (s.is_number_unsigned() || s.is_number_integer())
        {
            const auto count = s.get<std::uint64_t>();
            for (std::uint64_t i = 0; i < count; ++i)
                c.seeds.push_back(i);
        }
        else
        {
            c.seeds = s.get<std::vector<std::uint64_t>>();
        }
    }
    if (j.contains("scheme"))
        c.scheme = scheme_from_json(j.at("scheme"));
    c.methods = j.value("methods", std::vector<std::string>{});
    c.output_dir = j.value("output_dir", std::string{});
    c.record_timing = j.value("record_timing", true);
    c.svg = j.value("svg", true);
    c.threads = j.value("threads", std::size_t{1});
    c.blocks_per_side = j.value("blocks_per_side", std::size_t{4});
    if (j.contains("checks"))
    {
        for (const auto &cj : j.at("checks"))
        {
            reject_unknown(cj, {"method", "power", "slope_min", "slope_max"}, "check");
            SlopeCheck sc;
            sc.method = cj.at("method").get<std::string>();
            sc.power = cj.value("power", 1.0);
            if (cj.contains("slope_min"))
                sc.slope_min = cj.at("slope_min").get<double>();
            if (cj.contains("slope_max"))
                sc.slope_max = cj.at("slope_max").get<double>();
            c.checks.push_back(sc);
        }
    }
    c.validate();
    return c;
}

json SweepConfig::to_json() const
{
    json j;
    j["version"] = version;
    j["n_list"] = n_list;
    if (gamma)
        j["gamma"] = *gamma;
    else
        j["P_list"] = P_list;
    j["seeds"] = seeds;
    j["scheme"] = scheme_to_json(scheme);
    j["methods"] = methods;
    j["output_dir"] = output_dir;
    j["record_timing"] = record_timing;
    j["svg"] = svg;
    j["threads"] = threads;
    j["blocks_per_side"] = blocks_per_side;
    json cj = json::array();
    for (const auto &c : checks)
    {
        json e{{"method", c.method}, {"power", c.power}};
        if (c.slope_min)
            e["slope_min"] = *c.slope_min;
        if (c.slope_max)
            e["slope_max"] = *c.slope_max;
        cj.push_back(e);
    }
    j["checks"] = cj;
    return j;
}

SweepConfig SweepConfig::load(const fs::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw invalid_config("cannot read config " + path.string());
    json j;
    try
    {
        in >> j;
    }
    catch (const json::exception &e)
    {
        throw invalid_config("config " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

bool ScalingReport::all_passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult &c) { return c.passed; });
}

FitResult fit_loglog(const std::vector<double> &x, const std::vector<double> &y)
{
    if (x.size() != y.size())
        throw std::invalid_argument("x and y differ in length");
    std::vector<double> lx, ly;
    FitResult f;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(y[i]))
        {
            ++f.excluded;
            continue;
        }
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    std::set<double> distinct(lx.begin(), lx.end());
    if (distinct.size() < 3)
        throw std::invalid_argument("need at least 3 distinct x values");
    const double m = static_cast<double>(lx.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i)
    {
        sx += lx[i];
        sy += ly[i];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i)
    {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0;
    for (std::size_t i = 0; i < lx.size(); ++i)
    {
        const double e = ly[i] - (f.intercept + f.slope * lx[i]);
        sse += e * e;
    }
    f.stderr_slope = lx.size() > 2 ? std::sqrt(sse / (m - 2.0) / sxx) : 0.0;
    f.points = lx.size();
    return f;
}

FitResult fit_scaling_exponent(const std::vector<SweepRow> &rows, const std::string &method, double power)
{
    std::map<std::size_t, std::pair<double, std::size_t>> acc;
    std::size_t excluded = 0;
    for (const auto &r : rows)
    {
        if (r.method != method)
            continue;
        if (r.status != "ok" || !(r.value > 0.0) || !std::isfinite(r.value))
        {
            ++excluded;
            continue;
        }
        auto &a = acc[r.n];
        a.first += std::pow(r.value, power);
        a.second += 1;
    }
    std::vector<double> x, y;
    for (const auto &[n, a] : acc)
    {
        x.push_back(static_cast<double>(n));
        y.push_back(a.first / static_cast<double>(a.second));
    }
    FitResult f = fit_loglog(x, y);
    f.excluded += excluded;
    return f;
}

std::string csv_header()
{
    return "n,seed,method,value,wall_time_ms,status";
}

namespace
{

std::string row_line(const SweepRow &r, bool timing)
{
    std::ostringstream os;
    os << r.n << ',' << r.seed << ',' << r.method << ',' << format_double(r.value) << ','
       << (timing ? format_double(r.wall_time_ms) : std::string("0")) << ',' << r.status;
    return os.str();
}

} // namespace

void write_rows_csv(const std::vector<SweepRow> &rows, const fs::path &path, bool timing)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << csv_header() << '\n';
    for (const auto &r : rows)
        out << row_line(r, timing) << '\n';
}

std::vector<SweepRow> read_rows_csv(const fs::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != csv_header())
        throw std::runtime_error("unexpected CSV header in " + path.string());
    std::vector<SweepRow> rows;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            f.push_back(cell);
        // A row cut short by an interrupted write is dropped and recomputed.
        if (f.size() != 6)
            continue;
        SweepRow r;
        try
        {
            r.n = std::stoul(f[0]);
            r.seed = std::stoull(f[1]);
            r.method = f[2];
            r.value = f[3] == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[3]);
            r.wall_time_ms = std::stod(f[4]);
            r.status = f[5];
        }
        catch (const std::exception &)
        {
            continue;
        }
        rows.push_back(r);
    }
    return rows;
}

namespace
{

struct GroupContext
{
    NetworkConfig config;
    NodePlacement placement;
    std::optional<ChannelMatrix> matrix;
    std::optional<double> norm;
    std::optional<SchemeRateResult> scheme;
    std::string scheme_status;
};

constexpr std::size_t kDenseLimit = 4096;
constexpr std::size_t kMomentLimit = 2048;

const ChannelMatrix &dense(GroupContext &g)
{
    if (!g.matrix)
        g.matrix = build_channel_matrix(g.placement);
    return *g.matrix;
}

double power_norm(GroupContext &g)
{
    if (!g.norm)
        g.norm = spectral_norm(dense(g)).value;
    return *g.norm;
}

SweepRow evaluate(GroupContext &g, const SweepConfig &cfg, const std::string &method)
{
    SweepRow row;
    row.n = g.config.n;
    row.seed = g.config.seed;
    row.method = method;
    const auto t0 = std::chrono::steady_clock::now();
    try
    {
        const std::size_t n = g.config.n;
        if (method == "power_iter")
        {
            if (n > kDenseLimit)
                row.status = "too_large";
            else
                row.value = power_norm(g);
        }
        else if (method == "gershgorin_M1")
        {
            row.value = gershgorin_m1_bound(g.placement);
        }
        else if (method == "gershgorin_block")
        {
            const double side = g.placement.side() / static_cast<double>(cfg.blocks_per_side);
            const auto layout = partition_grid(g.placement, side);
            double best = 0.0;
            for (std::size_t j = 0; j < layout.cluster_count(); ++j)
            {
                double rs = 0.0;
                for (std::size_t k = 0; k < layout.cluster_count(); ++k)
                {
                    const auto b = channel_block(g.placement, layout.members[j], layout.members[k]);
                    rs += exact_norm(b);
                }
                // H is symmetric, so block-row and block-column sums coincide.
                best = std::max(best, rs);
            }
            row.value = best;
        }
        else if (method == "recursive")
        {
            RecursionOptions opt;
            opt.epsilon = cfg.scheme.epsilon;
            row.value = recursive_norm_bound(g.placement, opt).first;
        }
        else if (auto ell = moment_order(method))
        {
            if (n > kMomentLimit)
                row.status = "too_large";
            else
                row.value = std::sqrt(trace_moment(dense(g).entries, *ell).root_value);
        }
        else if (method == "upper_bound")
        {
            if (n <= kDenseLimit)
            {
                row.value = capacity_upper_bound(g.config.power, power_norm(g));
            }
            else
            {
                row.value = capacity_upper_bound(g.config.power, norm_lower_bound(g.placement));
                row.status = "lower_bound";
            }
        }
        else
        {
            if (!g.scheme && g.scheme_status.empty())
            {
                try
                {
                    g.scheme = measure_scheme_rate(g.config, cfg.scheme, g.placement);
                }
                catch (const layout_infeasible &)
                {
                    g.scheme_status = "infeasible";
                }
            }
            if (!g.scheme)
            {
                row.status = g.scheme_status;
            }
            else if (method == "tdma_rate")
                row.value = g.scheme->report.tdma_rate;
            else if (method == "scheme_rate")
                row.value = g.scheme->report.scheme_rate;
            else
                row.value = g.scheme->report.scheme_rate_optimistic;
        }
    }
    catch (const convergence_failure &e)
    {
        row.value = e.best_estimate;
        row.status = "no_convergence";
    }
    catch (const degenerate_placement &)
    {
        row.status = "degenerate";
    }
    catch (const std::exception &)
    {
        row.status = "error";
    }
    if (row.status != "ok" && row.status != "lower_bound" && row.value == 0.0)
        row.value = std::numeric_limits<double>::quiet_NaN();
    row.wall_time_ms = cfg.record_timing ? elapsed_ms(t0) : 0.0;
    return row;
}

using RowKey = std::tuple<std::size_t, std::uint64_t, std::string>;

} // namespace

ScalingReport run_sweep(const SweepConfig &config)
{
    config.validate();
    const fs::path dir = config.output_dir.empty() ? default_output_dir() : fs::path(config.output_dir);
    fs::create_directories(dir);
    const fs::path csv = dir / "sweep.csv";

    std::map<RowKey, SweepRow> done;
    if (fs::exists(csv))
    {
        auto kept = read_rows_csv(csv);
        for (auto &r : kept)
            done[{r.n, r.seed, r.method}] = r;
        // Drop any torn trailing line before appending.
        write_rows_csv(kept, csv, config.record_timing);
    }
    else
    {
        std::ofstream(csv) << csv_header() << '\n';
    }

    struct Group
    {
        std::size_t n_index;
        std::uint64_t seed;
    };
    std::vector<Group> groups;
    for (std::size_t i = 0; i < config.n_list.size(); ++i)
        for (auto s : config.seeds)
            groups.push_back({i, s});

    std::vector<std::vector<SweepRow>> results(groups.size());
    std::atomic<std::size_t> next{0};
    std::mutex io;
    auto worker = [&] {
        for (std::size_t gi = next++; gi < groups.size(); gi = next++)
        {
            const Group &grp = groups[gi];
            const std::size_t n = config.n_list[grp.n_index];
            std::vector<SweepRow> out;
            std::vector<std::string> missing;
            {
                std::lock_guard<std::mutex> lk(io);
                for (const auto &m : config.methods)
                {
                    auto it = done.find({n, grp.seed, m});
                    if (it != done.end())
                        out.push_back(it->second);
                    else
                        missing.push_back(m);
                }
            }
            if (!missing.empty())
            {
                GroupContext ctx;
                ctx.config = NetworkConfig::with_power(n, config.power_for(grp.n_index), grp.seed);
                if (config.gamma)
                    ctx.config.gamma = config.gamma;
                ctx.placement = place_nodes(ctx.config);
                std::vector<SweepRow> fresh;
                for (const auto &m : missing)
                    fresh.push_back(evaluate(ctx, config, m));
                std::lock_guard<std::mutex> lk(io);
                std::ofstream app(csv, std::ios::app);
                for (const auto &r : fresh)
                    app << row_line(r, config.record_timing) << '\n';
                out.insert(out.end(), fresh.begin(), fresh.end());
            }
            std::sort(out.begin(), out.end(), [&](const SweepRow &a, const SweepRow &b) {
                auto pos = [&](const std::string &m) {
                    return std::find(config.methods.begin(), config.methods.end(), m) - config.methods.begin();
                };
                return pos(a.method) < pos(b.method);
            });
            results[gi] = std::move(out);
        }
    };
    const std::size_t nt = std::min(config.threads, std::max<std::size_t>(groups.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < nt; ++i)
        pool.emplace_back(worker);
    worker();
    for (auto &t : pool)
        t.join();

    std::vector<SweepRow> rows;
    for (auto &r : results)
        rows.insert(rows.end(), r.begin(), r.end());
    write_rows_csv(rows, csv, config.record_timing);
    ScalingReport rep = build_report(config, std::move(rows));
    emit_report(rep, dir, config.svg);
    return rep;
}

ScalingReport build_report(const SweepConfig &config, std::vector<SweepRow> rows)
{
    ScalingReport rep;
    rep.rows = std::move(rows);
    std::set<std::string> methods;
    for (const auto &r : rep.rows)
        methods.insert(r.method);
    for (const auto &m : methods)
    {
        try
        {
            rep.fits[m] = fit_scaling_exponent(rep.rows, m);
        }
        catch (const std::invalid_argument &)
        {
        }
    }
    for (const auto &c : config.checks)
    {
        CheckResult cr;
        std::ostringstream name;
        name << "slope(" << c.method << (c.power != 1.0 ? "^" + format_double(c.power) : "") << ")";
        cr.name = name.str();
        try
        {
            const FitResult f = fit_scaling_exponent(rep.rows, c.method, c.power);
            cr.passed = (!c.slope_min || f.slope >= *c.slope_min) && (!c.slope_max || f.slope <= *c.slope_max);
            std::ostringstream d;
            d << "slope=" << f.slope << " stderr=" << f.stderr_slope << " range=[" << (c.slope_min ? *c.slope_min : -INFINITY)
              << "," << (c.slope_max ? *c.slope_max : INFINITY) << "]";
            cr.detail = d.str();
        }
        catch (const std::invalid_argument &e)
        {
            cr.passed = false;
            cr.detail = e.what();
        }
        rep.checks.push_back(cr);
    }
    CheckResult rows_ok;
    rows_ok.name = "rows";
    const auto bad = std::count_if(rep.rows.begin(), rep.rows.end(), [](const SweepRow &r) {
        return r.status != "ok" && r.status != "lower_bound" && r.status != "too_large";
    });
    rows_ok.passed = bad == 0;
    rows_ok.detail = std::to_string(rep.rows.size()) + " rows, " + std::to_string(bad) + " failed";
    rep.checks.push_back(rows_ok);
    return rep;
}

std::string render_svg(const std::vector<SweepRow> &rows, const std::vector<std::string> &methods,
                       const std::string &title)
{
    const double W = 640, H = 420, ml = 70, mr = 160, mt = 40, mb = 50;
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto &r : rows)
    {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end() || !(r.value > 0.0) ||
            !std::isfinite(r.value))
            continue;
        xmin = std::min(xmin, std::log10(static_cast<double>(r.n)));
        xmax = std::max(xmax, std::log10(static_cast<double>(r.n)));
        ymin = std::min(ymin, std::log10(r.value));
        ymax = std::max(ymax, std::log10(r.value));
    }
    if (!std::isfinite(xmin))
    {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax - xmin < 1e-9)
        xmax = xmin + 1;
    if (ymax - ymin < 1e-9)
        ymax = ymin + 1;
    auto px = [&](double lx) { return ml + (lx - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double ly) { return H - mb - (ly - ymin) / (ymax - ymin) * (H - mt - mb); };
    static const char *colors[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d",
                                   "#666666"};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << ml << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << (W - mr + ml) / 2 << "\" y=\"" << H - 12
       << "\" font-family=\"sans-serif\" font-size=\"12\">log10 n</text>\n";
    os << "<text x=\"12\" y=\"" << (H - mb + mt) / 2 << "\" font-family=\"sans-serif\" font-size=\"12\">log10 value</text>\n";
    for (std::size_t mi = 0; mi < methods.size(); ++mi)
    {
        const char *col = colors[mi % 8];
        for (const auto &r : rows)
            if (r.method == methods[mi] && r.value > 0.0 && std::isfinite(r.value))
                os << "<circle cx=\"" << px(std::log10(static_cast<double>(r.n))) << "\" cy=\""
                   << py(std::log10(r.value)) << "\" r=\"2\" fill=\"" << col << "\"/>\n";
        std::vector<std::pair<double, double>> pts;
        try
        {
            const FitResult f = fit_scaling_exponent(rows, methods[mi]);
            for (double lx : {xmin, xmax})
                pts.emplace_back(lx, (f.intercept + f.slope * lx * std::log(10.0)) / std::log(10.0));
        }
        catch (const std::invalid_argument &)
        {
        }
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" data-method=\"" << methods[mi] << "\" points=\"";
        for (const auto &[x, y] : pts)
            os << px(x) << ',' << py(y) << ' ';
        os << "\"/>\n";
        os << "<text x=\"" << W - mr + 10 << "\" y=\"" << mt + 16 * static_cast<double>(mi) + 10
           << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << col << "\">" << methods[mi] << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void emit_report(const ScalingReport &report, const fs::path &dir, bool svg)
{
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "fits.csv");
        if (!out)
            throw std::runtime_error("cannot write " + (dir / "fits.csv").string());
        out << "method,slope,intercept,stderr,points,excluded\n";
        for (const auto &[m, f] : report.fits)
            out << m << ',' << format_double(f.slope) << ',' << format_double(f.intercept) << ','
                << format_double(f.stderr_slope) << ',' << f.points << ',' << f.excluded << '\n';
    }
    {
        std::ofstream out(dir / "checks.txt");
        for (const auto &c : report.checks)
            out << (c.passed ? "PASS " : "FAIL ") << c.name << ' ' << c.detail << '\n';
    }
    if (!svg)
        return;
    std::vector<std::string> norms, rates;
    for (const auto &r : report.rows)
    {
        const bool rate = r.method == "upper_bound" || r.method == "tdma_rate" || r.method.rfind("scheme_rate", 0) == 0;
        auto &dst = rate ? rates : norms;
        if (std::find(dst.begin(), dst.end(), r.method) == dst.end())
            dst.push_back(r.method);
    }
    if (!norms.empty())
        std::ofstream(dir / "norms.svg") << render_svg(report.rows, norms, "norm and bounds vs n");
    if (!rates.empty())
        std::ofstream(dir / "rates.svg") << render_svg(report.rows, rates, "rates vs n");
}

fs::path default_output_dir()
{
    if (const char *e = std::getenv("BFBF_OUT_DIR"); e && *e)
        return fs::path(e);
    return fs::path("bfbf_out");
}

} // namespace bfbf
