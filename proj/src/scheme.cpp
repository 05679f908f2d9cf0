#include "bfbf/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>

#include "bfbf/errors.hpp"
#include "bfbf/rng.hpp"

namespace bfbf
{

namespace
{

using Index = Eigen::Index;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::complex<double> unit_phase(double turns)
{
    const double f = turns - std::floor(turns);
    return std::polar(1.0, kTwoPi * f);
}

} // namespace

void SchemeParams::validate() const
{
    if (!(c1 > std::sqrt(2.0)))
        throw invalid_config("c1 must exceed sqrt(2)");
    if (!(c2 > 0.0))
        throw invalid_config("c2 must be positive");
    if (!(epsilon > 0.0))
        throw invalid_config("epsilon must be positive");
    if (amplification < 0.0 || !std::isfinite(amplification))
        throw invalid_config("amplification must be non-negative");
    if (!(theta > 0.0) || !(burst_kappa >= 0.0) || !(design_sinr > 0.0))
        throw invalid_config("theta and design_sinr must be positive, burst_kappa non-negative");
    if (noise_realizations == 0 || sources == 0)
        throw invalid_config("noise_realizations and sources must be positive");
}

std::vector<std::size_t> PairLayout::all_tx() const
{
    std::vector<std::size_t> out;
    for (const auto &c : tx)
        out.insert(out.end(), c.begin(), c.end());
    return out;
}

std::vector<std::size_t> PairLayout::all_rx() const
{
    std::vector<std::size_t> out;
    for (const auto &c : rx)
        out.insert(out.end(), c.begin(), c.end());
    return out;
}

std::size_t pair_count_for(std::size_t n, const SchemeParams &params)
{
    const double nn = static_cast<double>(n);
    const double width = std::pow(nn, 0.25) / (2.0 * params.c1);
    const double gap = params.c2 * std::pow(nn, 0.25 + params.epsilon);
    return static_cast<std::size_t>(std::floor(std::sqrt(nn) / (width + gap)));
}

std::size_t min_feasible_n(const SchemeParams &params)
{
    std::size_t hi = 2;
    while (pair_count_for(hi, params) < 1)
    {
        if (hi > (std::size_t{1} << 40))
            return std::numeric_limits<std::size_t>::max();
        hi *= 2;
    }
    std::size_t lo = hi / 2;
    while (hi - lo > 1)
    {
        const std::size_t mid = lo + (hi - lo) / 2;
        (pair_count_for(mid, params) >= 1 ? hi : lo) = mid;
    }
    return hi;
}

PairLayout build_pair_layout(const NetworkConfig &config, const SchemeParams &params, const NodePlacement &placement)
{
    config.validate();
    params.validate();
    const double nn = static_cast<double>(config.n);
    PairLayout L;
    L.width = std::pow(nn, 0.25) / (2.0 * params.c1);
    L.length = std::sqrt(nn) / 4.0;
    L.d = std::sqrt(nn) / 4.0;
    L.vertical_gap = params.c2 * std::pow(nn, 0.25 + params.epsilon);
    L.M = L.width * L.length;
    L.pair_count = pair_count_for(config.n, params);
    L.tx_edge = L.length;
    L.rx_edge = L.length + L.d;
    if (L.pair_count < 1)
        throw layout_infeasible("no cluster pair fits", min_feasible_n(params));
    L.rounds_to_serve_all = static_cast<std::size_t>(std::ceil(nn / (static_cast<double>(L.pair_count) * L.M)));
    L.tx.resize(L.pair_count);
    L.rx.resize(L.pair_count);
    for (std::size_t i = 0; i < L.pair_count; ++i)
        L.band_y0.push_back(static_cast<double>(i) * (L.width + L.vertical_gap));
    for (std::size_t k = 0; k < placement.size(); ++k)
    {
        const Point &p = placement.positions[k];
        const double band = std::floor(p.y / (L.width + L.vertical_gap));
        if (band < 0.0 || band >= static_cast<double>(L.pair_count))
            continue;
        const auto i = static_cast<std::size_t>(band);
        if (p.y >= L.band_y0[i] + L.width)
            continue;
        if (p.x < L.length)
            L.tx[i].push_back(k);
        else if (p.x >= L.rx_edge && p.x < L.rx_edge + L.length)
            L.rx[i].push_back(k);
    }
    for (std::size_t i = 0; i < L.pair_count; ++i)
        if (L.tx[i].empty() || L.rx[i].empty())
            throw layout_infeasible("empty cluster in pair " + std::to_string(i), min_feasible_n(params));
    return L;
}

PhaseOneResult phase1_broadcast(const NetworkConfig &config, const NodePlacement &placement, std::size_t source,
                                double burst_power)
{
    if (source >= placement.size())
        throw std::out_of_range("source index out of range");
    if (!(burst_power > 0.0))
        throw std::invalid_argument("burst power must be positive");
    PhaseOneResult res;
    res.snr.resize(placement.size());
    res.min_snr = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < placement.size(); ++k)
    {
        if (k == source)
        {
            res.snr[k] = std::numeric_limits<double>::infinity();
            continue;
        }
        const double r = pairwise_distance(placement, source, k);
        res.snr[k] = burst_power / (r * r);
        if (res.snr[k] < res.min_snr)
        {
            res.min_snr = res.snr[k];
            res.argmin = k;
        }
    }
    res.meets_noise_precondition = res.min_snr >= 1.0 / std::sqrt(static_cast<double>(config.n));
    return res;
}

std::complex<double> coherent_gain(const NodePlacement &placement, const std::vector<std::size_t> &tx,
                                   std::size_t rx_node, double facing_edge_x)
{
    std::complex<double> g = 0.0;
    for (std::size_t k : tx)
    {
        const double r = pairwise_distance(placement, rx_node, k);
        const double xk = std::abs(placement.positions[k].x - facing_edge_x);
        g += unit_phase(r - xk) / r;
    }
    return g;
}

std::complex<double> uncompensated_gain(const NodePlacement &placement, const std::vector<std::size_t> &tx,
                                        std::size_t rx_node)
{
    std::complex<double> g = 0.0;
    for (std::size_t k : tx)
        g += los_gain(pairwise_distance(placement, rx_node, k));
    return g;
}

std::complex<double> interference_at(const PairLayout &layout, std::size_t rx_node, const NodePlacement &placement)
{
    std::size_t own = layout.pair_count;
    for (std::size_t i = 0; i < layout.pair_count && own == layout.pair_count; ++i)
        if (std::find(layout.rx[i].begin(), layout.rx[i].end(), rx_node) != layout.rx[i].end())
            own = i;
    if (own == layout.pair_count)
        throw std::invalid_argument("node is not in a receive cluster");
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < layout.pair_count; ++i)
        if (i != own)
            s += coherent_gain(placement, layout.tx[i], rx_node, layout.tx_edge);
    return s;
}

double compute_amplification(double d, double M, double snr_min, std::size_t t)
{
    if (!(snr_min > 0.0) || t < 1)
        throw std::invalid_argument("snr_min must be positive and t >= 1");
    return d / M * std::pow(snr_min, -1.0 / (2.0 * static_cast<double>(t)));
}

std::size_t compute_tau(std::size_t pair_count, double d, double M, std::size_t n, double P, double snr_min,
                        std::size_t t)
{
    if (pair_count == 0 || !(d > 0.0) || !(M > 0.0) || n == 0 || !(P > 0.0) || !(snr_min > 0.0) || t < 1)
        throw std::invalid_argument("compute_tau arguments must be positive");
    const double v = static_cast<double>(pair_count) * d * d / (static_cast<double>(n) * M * P) *
                     std::pow(snr_min, -1.0 / static_cast<double>(t));
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(v)));
}

std::size_t default_round_count(double snr_min, std::size_t n, double epsilon)
{
    if (snr_min >= 1.0)
        return 1;
    const double t = std::log(1.0 / snr_min) / (epsilon * std::log(static_cast<double>(n)));
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t - 1e-12)));
}

double phase1_burst_power(const NetworkConfig &config, const SchemeParams &params, const PairLayout &layout)
{
    const double nn = static_cast<double>(config.n);
    return std::max(nn * config.power,
                    params.burst_kappa * static_cast<double>(layout.pair_count) / layout.M * 2.0 * nn);
}

namespace
{

// Hop matrices between all transmit and all receive nodes of one TDMA step.
// fwd(j, k): receive node j hears transmit node k; bwd(k, j): the reverse.
// The -2 pi x pre-rotation of the sender is folded into each entry.
struct HopModel
{
    std::vector<std::size_t> tx, rx;
    std::vector<std::size_t> tx_off, rx_off;
    Eigen::MatrixXcd fwd, bwd;
    Eigen::MatrixXd fwd2, bwd2;

    HopModel(const PairLayout &L, const NodePlacement &placement, bool compensate)
    {
        tx_off.push_back(0);
        rx_off.push_back(0);
        for (std::size_t i = 0; i < L.pair_count; ++i)
        {
            tx.insert(tx.end(), L.tx[i].begin(), L.tx[i].end());
            rx.insert(rx.end(), L.rx[i].begin(), L.rx[i].end());
            tx_off.push_back(tx.size());
            rx_off.push_back(rx.size());
        }
        const auto nt = static_cast<Index>(tx.size()), nr = static_cast<Index>(rx.size());
        fwd.resize(nr, nt);
        bwd.resize(nt, nr);
        for (Index k = 0; k < nt; ++k)
        {
            const Point &pk = placement.positions[tx[static_cast<std::size_t>(k)]];
            const double xk = L.tx_edge - pk.x;
            for (Index j = 0; j < nr; ++j)
            {
                const Point &pj = placement.positions[rx[static_cast<std::size_t>(j)]];
                const double xj = pj.x - L.rx_edge;
                const double r = std::hypot(pj.x - pk.x, pj.y - pk.y);
                fwd(j, k) = (compensate ? unit_phase(r - xk) : unit_phase(r)) / r;
                bwd(k, j) = (compensate ? unit_phase(r - xj) : unit_phase(r)) / r;
            }
        }
        fwd2 = fwd.cwiseAbs2();
        bwd2 = bwd.cwiseAbs2();
    }

    // Minimum over receivers of the final SINR when every first-hop sender
    // starts at `snr`, noise is treated as independent across relays, and
    // each relay normalizes its output energy to A^2.
    double design_sinr(double snr, double A, std::size_t t) const
    {
        Eigen::VectorXd sig = Eigen::VectorXd::Constant(static_cast<Index>(tx.size()), std::sqrt(snr));
        Eigen::VectorXd var = Eigen::VectorXd::Ones(static_cast<Index>(tx.size()));
        for (std::size_t hop = 1; hop <= t; ++hop)
        {
            const bool forward = hop % 2 == 1;
            const Eigen::VectorXd g = A * (sig.array().square() + var.array()).rsqrt();
            const Eigen::VectorXcd x = (g.array() * sig.array()).cast<std::complex<double>>();
            const Eigen::VectorXcd v = forward ? Eigen::VectorXcd(fwd * x) : Eigen::VectorXcd(bwd * x);
            const Eigen::VectorXd gv = (g.array().square() * var.array()).matrix();
            var = (forward ? Eigen::VectorXd(fwd2 * gv) : Eigen::VectorXd(bwd2 * gv)).array() + 1.0;
            sig = v.cwiseAbs();
        }
        return (sig.array().square() / var.array()).minCoeff();
    }
};

SchemeTrace simulate(const NetworkConfig &config, const SchemeParams &params, const PairLayout &layout,
                     const NodePlacement &placement, const SchemeSchedule &sch, std::size_t source,
                     const HopModel &hm)
{
    const PhaseOneResult p1 = phase1_broadcast(config, placement, source, sch.burst_power);
    const std::size_t R = params.noise_realizations;
    Rng g = make_stream(config.seed, 0x51u * (static_cast<std::uint64_t>(source) + 1));

    std::size_t ns = hm.tx.size();
    Eigen::VectorXd sig(static_cast<Index>(ns)), var(static_cast<Index>(ns));
    Eigen::MatrixXcd W(static_cast<Index>(ns), static_cast<Index>(R));
    for (std::size_t k = 0; k < ns; ++k)
    {
        const auto K = static_cast<Index>(k);
        if (hm.tx[k] == source)
        {
            // The source knows its own message.
            sig(K) = 1.0;
            var(K) = 0.0;
            W.row(K).setZero();
            continue;
        }
        sig(K) = std::sqrt(p1.snr[hm.tx[k]]);
        var(K) = 1.0;
        for (std::size_t r = 0; r < R; ++r)
            W(K, static_cast<Index>(r)) = complex_normal(g);
    }

    SchemeTrace tr;
    tr.source = source;
    for (std::size_t hop = 1; hop <= sch.t; ++hop)
    {
        const bool forward = hop % 2 == 1;
        const Eigen::MatrixXcd &G = forward ? hm.fwd : hm.bwd;
        const auto &soff = forward ? hm.tx_off : hm.rx_off;
        const auto &doff = forward ? hm.rx_off : hm.tx_off;

        const Eigen::VectorXd gain = sch.amplification * (sig.array().square() + var.array()).rsqrt();
        const Eigen::VectorXcd x = (gain.array() * sig.array()).cast<std::complex<double>>();
        const Eigen::VectorXcd v = G * x;
        Eigen::VectorXcd own(G.rows());
        for (std::size_t i = 0; i + 1 < soff.size(); ++i)
        {
            const auto r0 = static_cast<Index>(doff[i]), rn = static_cast<Index>(doff[i + 1] - doff[i]);
            const auto c0 = static_cast<Index>(soff[i]), cn = static_cast<Index>(soff[i + 1] - soff[i]);
            own.segment(r0, rn) = G.block(r0, c0, rn, cn) * x.segment(c0, cn);
        }
        const Eigen::VectorXcd inter = v - own;

        // Each receiver derotates by the phase of its own signal coefficient.
        Eigen::VectorXcd ph(v.size());
        for (Index j = 0; j < v.size(); ++j)
            ph(j) = std::abs(v(j)) > 0.0 ? std::conj(v(j)) / std::abs(v(j)) : std::complex<double>(1.0);
        Eigen::MatrixXcd fw = ph.asDiagonal() * (G * (gain.cast<std::complex<double>>().asDiagonal() * W));

        const auto nd = static_cast<std::size_t>(G.rows());
        Eigen::VectorXd nvar(static_cast<Index>(nd));
        for (std::size_t j = 0; j < nd; ++j)
            nvar(static_cast<Index>(j)) = fw.row(static_cast<Index>(j)).squaredNorm() / static_cast<double>(R) + 1.0;
        sig = v.cwiseAbs();
        if (!sig.allFinite() || !nvar.allFinite())
            throw divergence_error("non-finite signal in round " + std::to_string(hop));

        RoundRecord rec;
        rec.round = hop;
        rec.direction = forward ? "forward" : "backward";
        rec.signal_power = own.squaredNorm() / static_cast<double>(nd);
        rec.interference_power = inter.squaredNorm() / static_cast<double>(nd);
        rec.noise_power = nvar.maxCoeff();
        rec.min_snr = (sig.array().square() / nvar.array()).minCoeff();
        tr.rounds.push_back(rec);
        tr.max_noise_power = std::max(tr.max_noise_power, rec.noise_power);

        for (std::size_t j = 0; j < nd; ++j)
            for (std::size_t r = 0; r < R; ++r)
                fw(static_cast<Index>(j), static_cast<Index>(r)) += complex_normal(g);
        W = std::move(fw);
        var = std::move(nvar);
        ns = nd;
    }
    tr.final_min_sinr = tr.rounds.back().min_snr;
    tr.decodable = tr.final_min_sinr >= params.theta;
    tr.bits = std::log2(1.0 + tr.final_min_sinr);
    const double slots = static_cast<double>(sch.tau * layout.rounds_to_serve_all);
    tr.achieved_rate = tr.bits / (slots * static_cast<double>(sch.t));
    tr.optimistic_rate = tr.bits / slots;
    return tr;
}

SchemeSchedule design_with(const NetworkConfig &config, const SchemeParams &params, const PairLayout &layout,
                           const HopModel &hm)
{
    SchemeSchedule s;
    s.burst_power = phase1_burst_power(config, params, layout);
    const double nn = static_cast<double>(config.n);
    s.design_snr = s.burst_power / (2.0 * nn);
    s.t = params.t ? params.t : default_round_count(s.design_snr, config.n, params.epsilon);
    s.amplification_nominal = compute_amplification(layout.d, layout.M, s.design_snr, s.t);
    s.tau_nominal = compute_tau(layout.pair_count, layout.d, layout.M, config.n, config.power, s.design_snr, s.t);

    s.saturation_sinr = hm.design_sinr(s.design_snr, 1e8, s.t);
    s.design_target = std::min(params.design_sinr, 0.5 * s.saturation_sinr);
    if (params.amplification > 0.0)
    {
        s.amplification = params.amplification;
    }
    else
    {
        double lo = 1e-4, hi = 1e8;
        for (int it = 0; it < 80 && hi / lo > 1.0 + 1e-9; ++it)
        {
            const double mid = std::sqrt(lo * hi);
            (hm.design_sinr(s.design_snr, mid, s.t) >= s.design_target ? hi : lo) = mid;
        }
        s.amplification = hi;
    }

    if (params.tau)
    {
        s.tau = params.tau;
    }
    else
    {
        // ceil(t/2) A^2 + burst/n <= P (tau t rounds + 1)
        const double E = s.amplification * s.amplification;
        const double tx_count = std::ceil(static_cast<double>(s.t) / 2.0);
        const double need = (tx_count * E + s.burst_power / nn - config.power) /
                            (config.power * static_cast<double>(s.t * layout.rounds_to_serve_all));
        s.tau = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(need - 1e-12)));
    }
    return s;
}

} // namespace

SchemeSchedule design_schedule(const NetworkConfig &config, const SchemeParams &params, const PairLayout &layout,
                               const NodePlacement &placement)
{
    const HopModel hm(layout, placement, params.phase_compensation);
    return design_with(config, params, layout, hm);
}

double average_power_per_node(const SchemeSchedule &schedule, const PairLayout &layout, const NetworkConfig &config)
{
    const double E = schedule.amplification * schedule.amplification;
    const double tx_count = std::ceil(static_cast<double>(schedule.t) / 2.0);
    const double slots = static_cast<double>(schedule.tau * schedule.t * layout.rounds_to_serve_all) + 1.0;
    return (tx_count * E + schedule.burst_power / static_cast<double>(config.n)) / slots;
}

SchemeTrace run_back_and_forth(const NetworkConfig &config, const SchemeParams &params, const PairLayout &layout,
                               const NodePlacement &placement, const SchemeSchedule &schedule, std::size_t source)
{
    params.validate();
    if (schedule.t < 1 || schedule.tau < 1 || !(schedule.amplification > 0.0))
        throw std::invalid_argument("schedule needs t >= 1, tau >= 1 and A > 0");
    const HopModel hm(layout, placement, params.phase_compensation);
    return simulate(config, params, layout, placement, schedule, source, hm);
}

void write_trace_csv(const SchemeTrace &trace, std::ostream &os)
{
    os << "round,direction,signal_power,interference_power,noise_power,min_snr\n";
    os.precision(12);
    for (const auto &r : trace.rounds)
        os << r.round << ',' << r.direction << ',' << r.signal_power << ',' << r.interference_power << ','
           << r.noise_power << ',' << r.min_snr << '\n';
}

SchemeRateResult measure_scheme_rate(const NetworkConfig &config, const SchemeParams &params,
                                     const NodePlacement &placement)
{
    const PairLayout layout = build_pair_layout(config, params, placement);
    const HopModel hm(layout, placement, params.phase_compensation);
    SchemeRateResult out;
    out.schedule = design_with(config, params, layout, hm);

    // Sampled sources: distinct, drawn from a stream separate from placement.
    Rng g = make_stream(config.seed, 0x5eedULL);
    std::vector<std::size_t> sources;
    const std::size_t want = std::min(params.sources, placement.size());
    while (sources.size() < want)
    {
        const auto s = static_cast<std::size_t>(uniform01(g) * static_cast<double>(placement.size()));
        if (std::find(sources.begin(), sources.end(), s) == sources.end())
            sources.push_back(s);
    }

    double bits = 0.0;
    std::size_t ok = 0;
    out.min_sinr = std::numeric_limits<double>::infinity();
    for (std::size_t s : sources)
    {
        SchemeTrace tr = simulate(config, params, layout, placement, out.schedule, s, hm);
        bits += tr.bits;
        ok += tr.decodable ? 1 : 0;
        out.min_sinr = std::min(out.min_sinr, tr.final_min_sinr);
        out.max_noise_power = std::max(out.max_noise_power, tr.max_noise_power);
        out.traces.push_back(std::move(tr));
    }
    const double slots = static_cast<double>(out.schedule.tau * layout.rounds_to_serve_all);
    const double k = static_cast<double>(sources.size());
    out.decodable_fraction = static_cast<double>(ok) / k;
    out.average_power = average_power_per_node(out.schedule, layout, config);

    RateReport &rep = out.report;
    rep.n = config.n;
    rep.P = config.power;
    rep.scheme_rate = bits / (k * slots * static_cast<double>(out.schedule.t));
    rep.scheme_rate_optimistic = bits / (k * slots);
    rep.per_user_rate = rep.scheme_rate / static_cast<double>(config.n);
    rep.tdma_rate = tdma_baseline_rate(config, placement);
    double norm;
    if (config.n <= 4096)
    {
        norm = spectral_norm(build_channel_matrix(placement)).value;
    }
    else
    {
        norm = norm_lower_bound(placement);
        out.norm_is_lower_bound = true;
    }
    rep.upper_bound = capacity_upper_bound(config.power, norm);
    return out;
}

GainSample gain_trial(std::size_t M, double d, double c1, std::uint64_t seed)
{
    Rng g = make_stream(seed);
    const double w = std::sqrt(d) / c1;
    std::vector<Point> pts(M + 1);
    for (std::size_t k = 0; k < M; ++k)
        pts[k] = {-d * uniform01(g), w * uniform01(g)};
    pts[M] = {d + d * uniform01(g), w * uniform01(g)};
    const NodePlacement pl = placement_from_points(std::move(pts), seed);
    std::vector<std::size_t> tx(M);
    for (std::size_t k = 0; k < M; ++k)
        tx[k] = k;
    GainSample s;
    const double scale = d / static_cast<double>(M);
    s.compensated = std::abs(coherent_gain(pl, tx, M, 0.0)) * scale;
    s.uncompensated = std::abs(uncompensated_gain(pl, tx, M)) * scale;
    return s;
}

} // namespace bfbf
