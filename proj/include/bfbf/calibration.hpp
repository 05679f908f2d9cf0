#pragma once

namespace bfbf
{

// Frozen by tools/calibrate.cpp (see README).
// 99th percentile of ||F||^2 d / M^{1+eps}, M = 256, d in {2 sqrt(M), ..., M}, 200 seeds, eps = 0.05.
inline constexpr double kBlockLawConstant = 1.129401;
// 5th percentile of |coherent gain| d / M, M = 64, d = 64, c1 = 2, 100 seeds.
inline constexpr double kGainConstant = 0.411021;
// 99th percentile of |interference| d n^eps / (M ln n), n = 65536, (c1, c2, eps) = (2, 1, 0.05), 100 seeds.
inline constexpr double kInterferenceConstant = 0.025048;

} // namespace bfbf
