// Usage: bfbf_acceptance [C1 ... C10 | all]
#include <chrono>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "bfbf/acceptance.hpp"

int main(int argc, char **argv)
{
    std::vector<std::string> ids;
    for (int i = 1; i < argc; ++i)
        ids.emplace_back(argv[i]);
    if (ids.empty() || (ids.size() == 1 && ids[0] == "all"))
        ids = bfbf::criterion_ids();

    bool ok = true;
    for (const auto &id : ids)
    {
        const auto t0 = std::chrono::steady_clock::now();
        try
        {
            const auto r = bfbf::run_criterion(id);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::printf("%s [%.1fs]\n", r.line().c_str(), secs);
            for (const auto &d : r.diagnostics)
                std::printf("    note: %s\n", d.c_str());
            ok = ok && r.passed;
        }
        catch (const std::exception &e)
        {
            std::printf("FAIL %s error: %s\n", id.c_str(), e.what());
            ok = false;
        }
        std::fflush(stdout);
    }
    return ok ? 0 : 1;
}
