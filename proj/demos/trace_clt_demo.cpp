// Copyright 2026 The haarlab Authors
// SPDX-License-Identifier: Apache-2.0

// Compares E|Tr U^l|^{2k} for Haar unitaries of growing size with the limit
// k! l^k, and prints the gap in standard errors.

#include <cstdio>

#include "haarlab/haarlab.hpp"

int main() {
    using namespace haarlab;

    TraceExperimentConfig cfg;
    cfg.sizes = {4, 8, 16};
    cfg.powers = {1, 2};
    cfg.k_max = 2;
    cfg.samples = 20000;
    cfg.plan.seed = 2026;
    cfg.plan.streams = 4;
    cfg.plan.workers = 1;

    const auto result = trace_experiment(cfg);
    std::printf("%-22s %5s %12s %10s %10s %7s\n", "statistic", "n", "estimate", "limit",
                "std_err", "z");
    for (auto const& r : result.rows) {
        std::printf("%-22s %5d %12.5f %10.5f %10.5f %7.2f\n", r.statistic.c_str(), r.n,
                    r.estimate.real(), r.reference.real(), r.std_error, r.z_score);
    }
    std::printf("overall: %s\n", result.passed() ? "consistent with the limit" : "inconsistent");
    return 0;
}
