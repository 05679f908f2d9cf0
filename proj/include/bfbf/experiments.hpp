#pragma once
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bfbf/scheme.hpp"

namespace bfbf
{

inline constexpr int kConfigVersion = 1;

// Methods understood by run_sweep.
//   power_iter, gershgorin_M1, gershgorin_block, recursive, moment_ell<k>:
//     values are norms (or norm bounds) of H
//   upper_bound, tdma_rate, scheme_rate, scheme_rate_optimistic: rates
bool is_known_method(const std::string &method);

struct SlopeCheck
{
    std::string method;
    // The fitted metric is value^power.
    double power = 1.0;
    std::optional<double> slope_min;
    std::optional<double> slope_max;
};

struct SweepConfig
{
    int version = kConfigVersion;
    std::vector<std::size_t> n_list;
    std::optional<double> gamma;
    std::vector<double> P_list;
    std::vector<std::uint64_t> seeds;
    SchemeParams scheme;
    std::vector<std::string> methods;
    std::string output_dir;
    bool record_timing = true;
    bool svg = true;
    std::size_t threads = 1;
    // Blocks per side for gershgorin_block.
    std::size_t blocks_per_side = 4;
    std::vector<SlopeCheck> checks;

    double power_for(std::size_t n_index) const;
    void validate() const;
    static SweepConfig from_json(const nlohmann::json &j);
    nlohmann::json to_json() const;
    static SweepConfig load(const std::filesystem::path &path);
};

struct SweepRow
{
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string method;
    double value = 0.0;
    double wall_time_ms = 0.0;
    std::string status = "ok";
};

struct FitResult
{
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    std::size_t points = 0;
    std::size_t excluded = 0;
};

struct CheckResult
{
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ScalingReport
{
    std::vector<SweepRow> rows;
    std::map<std::string, FitResult> fits;
    std::vector<CheckResult> checks;
    bool all_passed() const;
};

// Least squares of log y on log x; needs >= 3 distinct x.
FitResult fit_loglog(const std::vector<double> &x, const std::vector<double> &y);
// Seed-averages value^power per n for one method, then fits. Non-positive
// and non-ok rows are excluded and counted.
FitResult fit_scaling_exponent(const std::vector<SweepRow> &rows, const std::string &method, double power = 1.0);

std::string csv_header();
void write_rows_csv(const std::vector<SweepRow> &rows, const std::filesystem::path &path, bool timing = true);
std::vector<SweepRow> read_rows_csv(const std::filesystem::path &path);

// Runs every (n, seed, method) task. Rows already present in <output_dir>/sweep.csv
// are kept and not recomputed; new rows are appended as each (n, seed) group
// completes, and the file is rewritten in sorted order at the end.
ScalingReport run_sweep(const SweepConfig &config);
ScalingReport build_report(const SweepConfig &config, std::vector<SweepRow> rows);

// sweep.csv, fits.csv and (optionally) one SVG per metric family.
void emit_report(const ScalingReport &report, const std::filesystem::path &dir, bool svg);
std::string render_svg(const std::vector<SweepRow> &rows, const std::vector<std::string> &methods,
                       const std::string &title);

// Output directory from the environment (BFBF_OUT_DIR) or "bfbf_out".
std::filesystem::path default_output_dir();

} // namespace bfbf
