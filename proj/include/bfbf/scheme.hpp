#pragma once
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bfbf/capacity.hpp"
#include "bfbf/core_model.hpp"

namespace bfbf
{

struct SchemeParams
{
    double c1 = 2.0;
    double c2 = 1.0;
    double epsilon = 0.05;
    // 0 selects the smallest t with snr^{-1/t} <= n^eps.
    std::size_t t = 0;
    // 0 derives tau from the per-node energy budget.
    std::size_t tau = 0;
    // 0 calibrates A against design_sinr.
    double amplification = 0.0;
    double theta = 1.0;
    // Phase-1 burst: max(n P, burst_kappa * (N_C / M) * 2n).
    double burst_kappa = 32.0;
    double design_sinr = 4.0;
    std::size_t noise_realizations = 32;
    std::size_t sources = 8;
    bool phase_compensation = true;

    void validate() const;
};

// Cluster width is the transverse (y) extent, length the axial (x) extent.
// Transmit clusters occupy x in [0, length), receive clusters x in
// [length + d, 2 length + d); pair i sits at y in [i (width + gap), i (width + gap) + width).
struct PairLayout
{
    double width = 0.0;
    double length = 0.0;
    double d = 0.0;
    double vertical_gap = 0.0;
    // Nominal nodes per cluster (= area).
    double M = 0.0;
    std::size_t pair_count = 0;
    std::size_t rounds_to_serve_all = 0;
    double tx_edge = 0.0;
    double rx_edge = 0.0;
    std::vector<std::vector<std::size_t>> tx;
    std::vector<std::vector<std::size_t>> rx;
    std::vector<double> band_y0;

    std::vector<std::size_t> all_tx() const;
    std::vector<std::size_t> all_rx() const;
};

std::size_t pair_count_for(std::size_t n, const SchemeParams &params);
std::size_t min_feasible_n(const SchemeParams &params);
PairLayout build_pair_layout(const NetworkConfig &config, const SchemeParams &params, const NodePlacement &placement);

struct PhaseOneResult
{
    std::vector<double> snr;
    double min_snr = 0.0;
    std::size_t argmin = 0;
    // min SNR >= n^{-1/2}
    bool meets_noise_precondition = false;
};

PhaseOneResult phase1_broadcast(const NetworkConfig &config, const NodePlacement &placement, std::size_t source,
                                double burst_power);

// sum_k exp(2 pi i (r_jk - x_k)) / r_jk with x_k = |X_k - facing_edge_x|.
std::complex<double> coherent_gain(const NodePlacement &placement, const std::vector<std::size_t> &tx,
                                   std::size_t rx_node, double facing_edge_x);
// Same sum without the -2 pi x_k pre-rotation.
std::complex<double> uncompensated_gain(const NodePlacement &placement, const std::vector<std::size_t> &tx,
                                        std::size_t rx_node);
// Phase-compensated contribution of every other pair's transmit cluster.
std::complex<double> interference_at(const PairLayout &layout, std::size_t rx_node, const NodePlacement &placement);

// (d/M) snr^{-1/(2t)}
double compute_amplification(double d, double M, double snr_min, std::size_t t);
// ceil(N_C d^2 / (n M P) snr^{-1/t})
std::size_t compute_tau(std::size_t pair_count, double d, double M, std::size_t n, double P, double snr_min,
                        std::size_t t);
std::size_t default_round_count(double snr_min, std::size_t n, double epsilon);

double phase1_burst_power(const NetworkConfig &config, const SchemeParams &params, const PairLayout &layout);

// One schedule shared by every source of a network instance.
struct SchemeSchedule
{
    std::size_t t = 1;
    std::size_t tau = 1;
    std::size_t tau_nominal = 1;
    double amplification = 0.0;
    double amplification_nominal = 0.0;
    double burst_power = 0.0;
    // Worst-case phase-1 SNR, burst / (2n).
    double design_snr = 0.0;
    double design_target = 0.0;
    double saturation_sinr = 0.0;
};

SchemeSchedule design_schedule(const NetworkConfig &config, const SchemeParams &params, const PairLayout &layout,
                               const NodePlacement &placement);

// Average transmit power of a node over one full source cycle.
double average_power_per_node(const SchemeSchedule &schedule, const PairLayout &layout, const NetworkConfig &config);

struct RoundRecord
{
    std::size_t round = 0;
    std::string direction;
    double signal_power = 0.0;
    double interference_power = 0.0;
    double noise_power = 0.0;
    double min_snr = 0.0;
};

struct SchemeTrace
{
    std::size_t source = 0;
    std::vector<RoundRecord> rounds;
    bool decodable = false;
    double final_min_sinr = 0.0;
    double max_noise_power = 0.0;
    double bits = 0.0;
    double achieved_rate = 0.0;
    double optimistic_rate = 0.0;
};

SchemeTrace run_back_and_forth(const NetworkConfig &config, const SchemeParams &params, const PairLayout &layout,
                               const NodePlacement &placement, const SchemeSchedule &schedule, std::size_t source);

// Columns: round,direction,signal_power,interference_power,noise_power,min_snr
void write_trace_csv(const SchemeTrace &trace, std::ostream &os);

struct SchemeRateResult
{
    RateReport report;
    SchemeSchedule schedule;
    std::vector<SchemeTrace> traces;
    double decodable_fraction = 0.0;
    double min_sinr = 0.0;
    double max_noise_power = 0.0;
    double average_power = 0.0;
    // true when report.upper_bound uses a certified lower bound on ||H||.
    bool norm_is_lower_bound = false;
};

SchemeRateResult measure_scheme_rate(const NetworkConfig &config, const SchemeParams &params,
                                     const NodePlacement &placement);

// Standalone two-cluster gain experiment: M transmitters uniform in
// [-d, 0] x [0, sqrt(d)/c1], one receiver uniform in [d, 2d] x [0, sqrt(d)/c1].
// Both values are |gain| d / M.
struct GainSample
{
    double compensated = 0.0;
    double uncompensated = 0.0;
};
GainSample gain_trial(std::size_t M, double d, double c1, std::uint64_t seed);

} // namespace bfbf
