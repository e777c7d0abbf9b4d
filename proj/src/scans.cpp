#include "hypedyn/scans.hpp"

#include "hypedyn/error.hpp"
#include "hypedyn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

namespace hypedyn {

namespace {

// Runs fn(value_index) for every grid index across hardware threads.
// Each index writes only to its own output slots.
template <class Fn>
void for_each_value(std::size_t n, Fn&& fn) {
    const std::size_t workers =
        std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) {
                fn(i);
            }
        });
    }
}

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) {
            ++j;
        }
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    return r;
}

}  // namespace

void ScanConfig::validate() const {
    fixed.validate();
    detail::require(!grid.empty(), "scan grid must not be empty");
    detail::require(std::is_sorted(grid.begin(), grid.end()), "scan grid must be sorted");
    for (double v : grid) {
        detail::require(std::isfinite(v) && v >= 0.0, "scan grid values must be finite and >= 0");
    }
    detail::require(n_init >= 1, "n_init must be >= 1");
    detail::require(iters > burn_in, "iters must exceed burn_in");
    detail::require(std::isfinite(init_r_std) && init_r_std >= 0.0, "init_r_std must be >= 0");
    detail::require(std::isfinite(noise_std) && noise_std >= 0.0, "noise_std must be >= 0");
}

ModelParams ScanConfig::params_at(double value) const {
    ModelParams p = fixed;
    (vary == ScanAxis::Capacity ? p.capacity : p.alpha) = value;
    return p;
}

std::uint64_t run_seed(std::uint64_t base_seed, std::size_t value_index, std::size_t run) {
    return mix_seed(base_seed, {value_index, run});
}

std::vector<ScanPoint> bifurcation_scan(const ScanConfig& config) {
    config.validate();
    std::vector<ScanPoint> out(config.grid.size() * config.n_init);

    for_each_value(config.grid.size(), [&](std::size_t vi) {
        const double value = config.grid[vi];
        const ModelParams params = config.params_at(value);
        for (std::size_t run = 0; run < config.n_init; ++run) {
            std::mt19937_64 rng(run_seed(config.base_seed, vi, run));
            std::normal_distribution<double> normal(0.0, 1.0);
            MarketState x{0.0, config.init_r_std * normal(rng)};
            for (std::size_t t = 0; t < config.iters; ++t) {
                const double eps = config.noise_std > 0.0 ? config.noise_std * normal(rng) : 0.0;
                x = step(params, x, eps);
            }
            out[vi * config.n_init + run] = {value, run, x.phi, x.ret, std::nullopt};
        }
    });
    return out;
}

VolatilityScan volatility_scan(const ScanConfig& config) {
    config.validate();
    detail::require(config.noise_std > 0.0, "volatility scan needs noise_std > 0");

    VolatilityScan out;
    out.runs.resize(config.grid.size() * config.n_init);
    out.summary.resize(config.grid.size());

    for_each_value(config.grid.size(), [&](std::size_t vi) {
        const double value = config.grid[vi];
        const ModelParams params = config.params_at(value);
        const std::size_t kept = config.iters - config.burn_in;
        double total_std = 0.0;
        for (std::size_t run = 0; run < config.n_init; ++run) {
            std::mt19937_64 rng(run_seed(config.base_seed, vi, run));
            std::normal_distribution<double> normal(0.0, config.noise_std);
            MarketState x{};
            double sum = 0.0;
            double sum_sq = 0.0;
            for (std::size_t t = 1; t <= config.iters; ++t) {
                x = step(params, x, normal(rng));
                if (t > config.burn_in) {
                    sum += x.ret;
                    sum_sq += x.ret * x.ret;
                }
            }
            const double mean = sum / static_cast<double>(kept);
            const double var = std::max(0.0, sum_sq / static_cast<double>(kept) - mean * mean);
            const double sd = std::sqrt(var);
            total_std += sd;
            out.runs[vi * config.n_init + run] = {value, run, x.phi, x.ret, sd};
        }
        out.summary[vi] = {value, total_std / static_cast<double>(config.n_init)};
    });
    return out;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    detail::require(x.size() == y.size() && x.size() >= 2, "spearman needs paired samples");
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mean = (n + 1.0) / 2.0;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mean) * (ry[i] - mean);
        sxx += (rx[i] - mean) * (rx[i] - mean);
        syy += (ry[i] - mean) * (ry[i] - mean);
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw NumericalError("spearman: constant input");
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace hypedyn
