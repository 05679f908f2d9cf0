#pragma once
#include <cstddef>
#include <string>
#include <vector>

namespace bfbf
{

struct CriterionResult
{
    std::string id;
    std::string title;
    bool passed = false;
    // One "name: value (requirement) PASS|FAIL" entry per assertion.
    std::vector<std::string> assertions;
    // Extra numbers that explain a result without being asserted.
    std::vector<std::string> diagnostics;

    std::string line() const;
};

struct AcceptanceOptions
{
    // 0 keeps each criterion's own seed count.
    std::size_t seeds = 0;
};

std::vector<std::string> criterion_ids();
CriterionResult run_criterion(const std::string &id, const AcceptanceOptions &options = {});

// Linear-interpolation percentile, q in [0, 100].
double percentile(std::vector<double> v, double q);

} // namespace bfbf
