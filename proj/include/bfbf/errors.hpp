#pragma once
#include <cstddef>
#include <stdexcept>
#include <string>

namespace bfbf
{

struct invalid_config : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

struct invalid_partition : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

// Two nodes closer than 1e-9 distance units.
struct degenerate_placement : std::runtime_error
{
    std::size_t j, k;
    degenerate_placement(std::size_t j_, std::size_t k_)
        : std::runtime_error("coincident nodes " + std::to_string(j_) + " and " + std::to_string(k_)), j(j_), k(k_) {}
};

struct convergence_failure : std::runtime_error
{
    double best_estimate;
    std::size_t iterations;
    convergence_failure(double est, std::size_t it)
        : std::runtime_error("power iteration did not converge after " + std::to_string(it) + " iterations"),
          best_estimate(est), iterations(it) {}
};

// Off-diagonal block bound requested outside 2*sqrt(M) <= d <= M.
struct window_violation : std::domain_error
{
    using std::domain_error::domain_error;
};

struct layout_infeasible : std::runtime_error
{
    std::size_t min_feasible_n;
    layout_infeasible(const std::string &what, std::size_t min_n)
        : std::runtime_error(what + " (minimum feasible n: " + std::to_string(min_n) + ")"), min_feasible_n(min_n) {}
};

struct divergence_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

} // namespace bfbf
