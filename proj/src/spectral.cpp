#include "bfbf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "bfbf/errors.hpp"
#include "bfbf/rng.hpp"

namespace bfbf
{

namespace
{

using Index = Eigen::Index;

Eigen::MatrixXcd gather(const Eigen::MatrixXcd &a, const std::vector<std::size_t> &rows,
                        const std::vector<std::size_t> &cols)
{
    Eigen::MatrixXcd b(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (std::size_t r = 0; r < rows.size(); ++r)
            b(static_cast<Index>(r), static_cast<Index>(c)) = a(static_cast<Index>(rows[r]), static_cast<Index>(cols[c]));
    return b;
}

double block_norm(const Eigen::MatrixXcd &b, double)
{
    return exact_norm(b);
}

} // namespace

double exact_norm(const Eigen::MatrixXcd &a)
{
    if (a.size() == 0)
        return 0.0;
    if (a.rows() == 1 || a.cols() == 1)
        return a.norm();
    const Eigen::MatrixXcd g = a.rows() <= a.cols() ? Eigen::MatrixXcd(a * a.adjoint()) : Eigen::MatrixXcd(a.adjoint() * a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
}

NormResult spectral_norm(const Eigen::MatrixXcd &a, double tolerance, std::size_t max_iterations)
{
    NormResult res;
    if (a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0)
        return res;
    if (!a.allFinite())
        throw std::invalid_argument("matrix has non-finite entries");
    if (!(tolerance > 0.0))
        throw std::invalid_argument("tolerance must be positive");
    const auto n = static_cast<std::size_t>(std::max(a.rows(), a.cols()));
    const std::size_t cap = max_iterations ? max_iterations : std::max<std::size_t>(10 * n, 1000);

    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(a.cols()) / std::sqrt(static_cast<double>(a.cols()));
    Eigen::VectorXcd w = a * v;
    if (w.norm() == 0.0)
    {
        // Start vector in the null space; restart on the heaviest column.
        Index best;
        a.colwise().norm().maxCoeff(&best);
        v.setZero();
        v(best) = 1.0;
        w = a * v;
    }
    double est = w.norm();
    for (std::size_t it = 1; it <= cap; ++it)
    {
        Eigen::VectorXcd u = a.adjoint() * w;
        const double un = u.norm();
        if (un == 0.0)
        {
            res.value = est;
            res.iterations = it;
            return res;
        }
        v = u / un;
        w = a * v;
        const double next = w.norm();
        res.residual = std::abs(next - est) / next;
        est = next;
        res.iterations = it;
        if (res.residual <= tolerance)
        {
            res.value = est;
            return res;
        }
    }
    throw convergence_failure(est, cap);
}

NormResult spectral_norm(const ChannelMatrix &h, double tolerance, std::size_t max_iterations)
{
    return spectral_norm(h.entries, tolerance, max_iterations);
}

BlockPartition BlockPartition::from_layout(const ClusterLayout &layout)
{
    BlockPartition p;
    p.K = layout.cluster_count();
    p.M = layout.cluster_area;
    std::size_t pos = 0;
    for (const auto &m : layout.members)
    {
        p.ranges.emplace_back(pos, pos + m.size());
        p.permutation.insert(p.permutation.end(), m.begin(), m.end());
        pos += m.size();
    }
    return p;
}

BlockPartition BlockPartition::singletons(std::size_t n)
{
    BlockPartition p;
    p.K = n;
    p.M = 1.0;
    p.permutation.resize(n);
    std::iota(p.permutation.begin(), p.permutation.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i)
        p.ranges.emplace_back(i, i + 1);
    return p;
}

BlockPartition BlockPartition::single_block(std::size_t n)
{
    BlockPartition p;
    p.K = 1;
    p.M = static_cast<double>(n);
    p.permutation.resize(n);
    std::iota(p.permutation.begin(), p.permutation.end(), std::size_t{0});
    p.ranges.emplace_back(0, n);
    return p;
}

void BlockPartition::validate(std::size_t n) const
{
    if (permutation.size() != n || ranges.size() != K)
        throw invalid_partition("partition does not match matrix dimension");
    std::vector<char> seen(n, 0);
    for (std::size_t i : permutation)
    {
        if (i >= n || seen[i])
            throw invalid_partition("partition is not a permutation");
        seen[i] = 1;
    }
    std::size_t pos = 0;
    for (const auto &[lo, hi] : ranges)
    {
        if (lo != pos || hi < lo)
            throw invalid_partition("block ranges are not contiguous");
        pos = hi;
    }
    if (pos != n)
        throw invalid_partition("block ranges do not cover all nodes");
}

std::vector<std::size_t> BlockPartition::block_nodes(std::size_t b) const
{
    return {permutation.begin() + static_cast<std::ptrdiff_t>(ranges[b].first),
            permutation.begin() + static_cast<std::ptrdiff_t>(ranges[b].second)};
}

GershgorinResult block_gershgorin(const Eigen::MatrixXcd &a, const BlockPartition &partition, double tolerance)
{
    if (a.rows() != a.cols())
        throw invalid_partition("matrix must be square");
    partition.validate(static_cast<std::size_t>(a.rows()));
    const std::size_t K = partition.K;
    std::vector<std::vector<std::size_t>> nodes(K);
    for (std::size_t b = 0; b < K; ++b)
        nodes[b] = partition.block_nodes(b);
    Eigen::MatrixXd norms(static_cast<Index>(K), static_cast<Index>(K));
    for (std::size_t j = 0; j < K; ++j)
        for (std::size_t k = 0; k < K; ++k)
            norms(static_cast<Index>(j), static_cast<Index>(k)) = block_norm(gather(a, nodes[j], nodes[k]), tolerance);

    GershgorinResult res;
    const Eigen::VectorXd rows = norms.rowwise().sum();
    const Eigen::VectorXd cols = norms.colwise().sum().transpose();
    res.value = -1.0;
    for (std::size_t j = 0; j < K; ++j)
    {
        if (rows(static_cast<Index>(j)) > res.value)
        {
            res.value = rows(static_cast<Index>(j));
            res.argmax = j;
            res.attained_on_rows = true;
        }
    }
    for (std::size_t j = 0; j < K; ++j)
    {
        const double v = cols(static_cast<Index>(j));
        if (v > res.value || (v == res.value && j < res.argmax))
        {
            res.value = v;
            res.argmax = j;
            res.attained_on_rows = false;
        }
    }
    res.value = std::max(res.value, 0.0);
    return res;
}

double block_gershgorin_bound(const Eigen::MatrixXcd &a, const BlockPartition &partition, double tolerance)
{
    return block_gershgorin(a, partition, tolerance).value;
}

double block_gershgorin_bound(const ChannelMatrix &h, const BlockPartition &partition, double tolerance)
{
    return block_gershgorin(h.entries, partition, tolerance).value;
}

double gershgorin_m1_bound(const NodePlacement &placement, const std::vector<std::size_t> &nodes)
{
    double best = 0.0;
    for (std::size_t a : nodes)
    {
        double s = 0.0;
        for (std::size_t b : nodes)
        {
            if (a == b)
                continue;
            const double r = pairwise_distance(placement, a, b);
            if (r < kCoincidentDistance)
                throw degenerate_placement(a, b);
            s += 1.0 / r;
        }
        best = std::max(best, s);
    }
    return best;
}

double gershgorin_m1_bound(const NodePlacement &placement)
{
    std::vector<std::size_t> all(placement.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return gershgorin_m1_bound(placement, all);
}

double exponent_map(double b)
{
    if (!(b >= 0.25 && b <= 0.5))
        throw std::invalid_argument("exponent must lie in [1/4, 1/2]");
    return 3.0 * b / (4.0 * b + 2.0);
}

std::vector<double> exponent_sequence(double b0, std::size_t count)
{
    std::vector<double> seq;
    double b = b0;
    for (std::size_t i = 0; i < count; ++i)
    {
        seq.push_back(b);
        b = exponent_map(b);
    }
    return seq;
}

namespace
{

using BlockFn = std::function<Eigen::MatrixXcd(const std::vector<std::size_t> &, const std::vector<std::size_t> &)>;

struct Recursion
{
    const NodePlacement &placement;
    const RecursionOptions &opt;
    BlockFn block;
    double n_top;
    std::vector<double> seq;
    RecursionTrace trace;

    double base(const std::vector<std::size_t> &nodes) const { return gershgorin_m1_bound(placement, nodes); }

    double run(const std::vector<std::size_t> &nodes, double x0, double y0, double w, double h, std::size_t level)
    {
        if (level >= opt.depth || nodes.size() < opt.min_block_nodes || seq[level] - 0.25 < opt.exponent_gap)
            return base(nodes);
        const double b = seq[level];
        const double M = std::floor(opt.area_scale * std::pow(w * h, 3.0 / (4.0 * b + 2.0)));
        const double s = std::sqrt(M);
        if (!(M >= 1.0) || s > std::max(w, h))
            return base(nodes);
        const ClusterLayout L = partition_region(placement, nodes, x0, y0, w, h, s);
        // A 3x3 neighbourhood would cover the whole region: no shrink possible.
        if (L.grid_cols <= 3 && L.grid_rows <= 3)
            return base(nodes);

        if (trace.chosen_M_sequence.size() <= level)
            trace.chosen_M_sequence.push_back(static_cast<std::size_t>(M));
        trace.levels_used = std::max(trace.levels_used, level + 1);

        const std::size_t K = L.cluster_count();
        const double lim = 2.0 * s;
        double far_max = 0.0;
        for (std::size_t j = 0; j < K; ++j)
        {
            double sum = 0.0;
            for (std::size_t k = 0; k < K; ++k)
            {
                const double d = L.distances(static_cast<Index>(j), static_cast<Index>(k));
                if (d < lim || L.members[j].empty() || L.members[k].empty())
                    continue;
                if (d <= M)
                {
                    sum += std::sqrt(opt.c * std::pow(n_top, opt.epsilon) * M / d);
                    ++trace.window_blocks;
                }
                else
                {
                    sum += block_norm(block(L.members[j], L.members[k]), opt.tolerance);
                    ++trace.measured_blocks;
                }
            }
            far_max = std::max(far_max, sum);
        }

        double near_max = 0.0;
        for (std::size_t j = 0; j < K; ++j)
        {
            const std::size_t cj = j % L.grid_cols, rj = j / L.grid_cols;
            const std::size_t c0 = cj ? cj - 1 : 0, c1 = std::min(cj + 1, L.grid_cols - 1);
            const std::size_t r0 = rj ? rj - 1 : 0, r1 = std::min(rj + 1, L.grid_rows - 1);
            std::vector<std::size_t> sub;
            for (std::size_t r = r0; r <= r1; ++r)
                for (std::size_t c = c0; c <= c1; ++c)
                {
                    const auto &m = L.members[r * L.grid_cols + c];
                    sub.insert(sub.end(), m.begin(), m.end());
                }
            const double sx0 = x0 + static_cast<double>(c0) * s;
            const double sy0 = y0 + static_cast<double>(r0) * s;
            const double sx1 = c1 + 1 == L.grid_cols ? x0 + w : x0 + static_cast<double>(c1 + 1) * s;
            const double sy1 = r1 + 1 == L.grid_rows ? y0 + h : y0 + static_cast<double>(r1 + 1) * s;
            near_max = std::max(near_max, run(sub, sx0, sy0, sx1 - sx0, sy1 - sy0, level + 1));
        }
        return 9.0 * near_max + far_max;
    }
};

std::pair<double, RecursionTrace> recursive_impl(const NodePlacement &placement, const RecursionOptions &opt,
                                                 BlockFn block)
{
    if (!(opt.epsilon > 0.0))
        throw std::invalid_argument("epsilon must be positive");
    if (!(opt.b0 >= 0.25 && opt.b0 <= 0.5))
        throw std::invalid_argument("b0 must lie in [1/4, 1/2]");
    if (!(opt.area_scale > 0.0))
        throw std::invalid_argument("area_scale must be positive");
    Recursion rec{placement, opt, std::move(block), static_cast<double>(placement.size()),
                  exponent_sequence(opt.b0, opt.depth + 1), {}};
    rec.trace.exponent_sequence = exponent_sequence(opt.b0, std::max<std::size_t>(opt.depth, 1));
    std::vector<std::size_t> all(placement.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const double side = placement.side();
    const double v = rec.run(all, 0.0, 0.0, side, side, 0);
    rec.trace.final_bound = v;
    return {v, rec.trace};
}

} // namespace

std::pair<double, RecursionTrace> recursive_norm_bound(const NodePlacement &placement, const RecursionOptions &options)
{
    return recursive_impl(placement, options, [&placement](const auto &r, const auto &c) {
        return channel_block(placement, r, c);
    });
}

std::pair<double, RecursionTrace> recursive_norm_bound(const ChannelMatrix &h, const NodePlacement &placement,
                                                       const RecursionOptions &options)
{
    if (h.n() != placement.size())
        throw std::invalid_argument("matrix and placement sizes differ");
    return recursive_impl(placement, options, [&h](const auto &r, const auto &c) { return gather(h.entries, r, c); });
}

double offdiag_block_bound(double M, double d, double epsilon, double c)
{
    if (d < 2.0 * std::sqrt(M))
        throw window_violation("cluster distance below 2 sqrt(M)");
    if (d > M)
        throw window_violation("cluster distance above M");
    return std::sqrt(c * std::pow(M, 1.0 + epsilon) / d);
}

bool offdiag_block_bound_holds(const Eigen::MatrixXcd &block, double M, double d, double epsilon, double c)
{
    return block_norm(block, 1e-10) <= offdiag_block_bound(M, d, epsilon, c);
}

MomentEstimate trace_moment(const Eigen::MatrixXcd &f, std::size_t ell)
{
    if (ell < 1)
        throw std::invalid_argument("moment order must be at least 1");
    MomentEstimate m;
    m.ell = ell;
    if (f.size() == 0)
        return m;
    // F F^H and F^H F share their non-zero spectrum; use the smaller one.
    const Eigen::MatrixXcd w = f.rows() <= f.cols() ? Eigen::MatrixXcd(f * f.adjoint()) : Eigen::MatrixXcd(f.adjoint() * f);
    Eigen::MatrixXcd p = w;
    for (std::size_t i = 1; i < ell; ++i)
        p = p * w;
    m.trace_value = std::max(p.trace().real(), 0.0);
    m.root_value = std::pow(m.trace_value, 1.0 / static_cast<double>(ell));
    return m;
}

Eigen::MatrixXcd random_cluster_pair_block(std::size_t M, double d, std::uint64_t seed, std::vector<Point> *tx,
                                           std::vector<Point> *rx)
{
    Rng g = make_stream(seed);
    const double s = std::sqrt(static_cast<double>(M));
    std::vector<Point> a(M), b(M);
    for (auto &p : a)
        p = {(uniform01(g) - 0.5) * s, (uniform01(g) - 0.5) * s};
    for (auto &p : b)
        p = {d + (uniform01(g) - 0.5) * s, (uniform01(g) - 0.5) * s};
    Eigen::MatrixXcd f(static_cast<Index>(M), static_cast<Index>(M));
    for (std::size_t k = 0; k < M; ++k)
        for (std::size_t j = 0; j < M; ++j)
            f(static_cast<Index>(j), static_cast<Index>(k)) = los_gain(std::hypot(b[j].x - a[k].x, b[j].y - a[k].y));
    if (tx)
        *tx = std::move(a);
    if (rx)
        *rx = std::move(b);
    return f;
}

} // namespace bfbf
