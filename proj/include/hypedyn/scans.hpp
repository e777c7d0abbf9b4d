#pragma once

#include "hypedyn/dynamics.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace hypedyn {

enum class ScanAxis { Capacity, Alpha };

/// Ensemble experiment over one parameter. Defaults: 100 runs, 1000
/// iterations, r0 ~ N(0, 0.25), no return noise; volatility scans
/// discard the first 50 values.
struct ScanConfig {
    ScanAxis vary = ScanAxis::Capacity;
    std::vector<double> grid;
    ModelParams fixed;
    std::size_t n_init = 100;
    std::size_t iters = 1000;
    std::size_t burn_in = 50;
    double init_r_std = 0.5;
    double noise_std = 0.0;
    std::uint64_t base_seed = 0;

    void validate() const;
    /// `fixed` with the scanned parameter set to `value`.
    [[nodiscard]] ModelParams params_at(double value) const;
};

struct ScanPoint {
    double value = 0.0;
    std::size_t run = 0;
    double final_phi = 0.0;
    double final_ret = 0.0;
    std::optional<double> std_ret;
};

struct VolatilityPoint {
    double value = 0.0;
    double mean_std = 0.0;
};

struct VolatilityScan {
    std::vector<ScanPoint> runs;
    std::vector<VolatilityPoint> summary;
};

/// Seed of run `run` at grid position `value_index`.
std::uint64_t run_seed(std::uint64_t base_seed, std::size_t value_index, std::size_t run);

/// Final (phi, r) after `iters` steps from phi0 = 0, r0 ~ N(0, init_r_std^2),
/// for every grid value and run. Rows are ordered by (grid index, run).
std::vector<ScanPoint> bifurcation_scan(const ScanConfig& config);

/// Std of r over steps (burn_in, iters] from (0, 0) under return noise,
/// per run and averaged per grid value.
VolatilityScan volatility_scan(const ScanConfig& config);

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hypedyn
