// Recomputes the constants frozen in include/bfbf/calibration.hpp.
#include <cmath>
#include <cstdio>
#include <vector>

#include "bfbf/acceptance.hpp"
#include "bfbf/scheme.hpp"
#include "bfbf/spectral.hpp"

using namespace bfbf;

int main()
{
    const double eps = 0.05;

    // Block law: M = 256, d from 2 sqrt(M) to M.
    {
        const std::size_t M = 256;
        std::vector<double> stat;
        for (double d = 32.0; d <= 256.0; d += 16.0)
            for (std::size_t s = 0; s < 200; ++s)
            {
                const auto f = random_cluster_pair_block(M, d, 7000000 + 1000 * static_cast<std::size_t>(d) + s);
                const double v = spectral_norm(f, 1e-10).value;
                stat.push_back(v * v * d / std::pow(static_cast<double>(M), 1.0 + eps));
            }
        std::printf("kBlockLawConstant = %.6f  (%zu blocks)\n", percentile(stat, 99.0), stat.size());
    }

    // Gain: M = 64, d = 64, c1 = 2.
    {
        std::vector<double> g;
        for (std::size_t s = 0; s < 100; ++s)
            g.push_back(gain_trial(64, 64.0, 2.0, 7100000 + s).compensated);
        std::printf("kGainConstant = %.6f\n", percentile(g, 5.0));
    }

    // Interference: n = 65536.
    {
        const std::size_t n = 65536;
        SchemeParams sp;
        std::vector<double> stat;
        for (std::size_t s = 0; s < 100; ++s)
        {
            const auto cfg = NetworkConfig::with_power(n, 1.0 / static_cast<double>(n), 7200000 + s);
            const auto pl = place_nodes(cfg);
            const auto L = build_pair_layout(cfg, sp, pl);
            const double scale = L.d * std::pow(static_cast<double>(n), sp.epsilon) / (L.M * std::log(static_cast<double>(n)));
            for (const auto &rx : L.rx)
                for (std::size_t j : rx)
                    stat.push_back(std::abs(interference_at(L, j, pl)) * scale);
        }
        std::printf("kInterferenceConstant = %.6f\n", percentile(stat, 99.0));
    }
    return 0;
}
