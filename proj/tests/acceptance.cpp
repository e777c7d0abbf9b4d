// Acceptance checks. One PASS/FAIL line per criterion; `--criterion N` runs one.

#include "hypedyn/dynamics.hpp"
#include "hypedyn/error.hpp"
#include "hypedyn/estimate.hpp"
#include "hypedyn/features.hpp"
#include "hypedyn/matching.hpp"
#include "hypedyn/panel.hpp"
#include "hypedyn/scans.hpp"
#include "hypedyn/sir.hpp"
#include "hypedyn/stability.hpp"
#include "oracle.hpp"
#include "synthetic.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace hypedyn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

// Positive root of tanh(a x) = x for a > 1.
double tanh_root(double a) {
    double lo = 1e-6, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (std::tanh(a * mid) - mid > 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

ModelParams model(double alpha, double beta, double capacity, double lambda = 1.0) {
    ModelParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.capacity = capacity;
    p.lambda = lambda;
    return p;
}

Outcome ac1() {
    const std::vector<double> alphas{0.5, 0.7, 0.9, 1.0, 1.1, 1.5, 2.0};
    bool ok = true;
    std::string counts;
    for (double a : alphas) {
        auto n = steady_states(model(a, 1, 1)).size();
        counts += num(a) + ":" + std::to_string(n) + " ";
        ok = ok && n == (a <= 1.0 ? 1u : 3u);
    }
    double phi = 0;
    for (const auto& s : steady_states(model(1.5, 1, 1)))
        if (s.kind == SteadyKind::Positive) phi = s.phi;
    double oracle = tanh_root(1.5);
    ok = ok && std::abs(phi - oracle) < 1e-10;
    return {ok, "counts " + counts + "phi+(1.5)=" + num(phi) + " oracle=" + num(oracle) +
                    " |phi+ - 0.8580|=" + num(std::abs(phi - 0.8580))};
}

Outcome ac2() {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> a(0.05, 3), b(0.05, 3), c(0.0, 3);
    double worst = 0;
    int nonzero = 0;
    for (int i = 0; i < 1000; ++i) {
        auto p = model(a(rng), b(rng), c(rng));
        for (const auto& s : steady_states(p)) {
            auto j = jacobian_at(p, s);
            double w = s.kind == SteadyKind::Zero ? 1.0 : 1.0 / std::pow(std::cosh(p.alpha * s.phi), 2);
            nonzero += s.kind != SteadyKind::Zero;
            worst = std::max(worst, std::abs(j.determinant() - p.capacity * p.beta * w));
            worst = std::max(worst, std::abs(j.trace() - w * (p.alpha + p.capacity * p.beta)));
        }
    }
    return {worst <= 1e-10 && nonzero > 500,
            "max identity error " + num(worst) + " over 1000 draws (" + std::to_string(nonzero) + " nonzero states)"};
}

Outcome ac3() {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> a(0.05, 0.95), c(0.0, 3.0);
    int stable = 0, unstable = 0, stable_ok = 0, unstable_ok = 0;
    while (stable < 50 || unstable < 50) {
        auto p = model(a(rng), 1.0, c(rng));
        RegionLabels label;
        try {
            label = region_label(p);
        } catch (const BoundaryCase&) {
            continue;
        }
        double radius = eigenvalues(jacobian_at(p, {0.0, 0.0, SteadyKind::Zero})).spectral_radius();
        bool in_cd = label.zero == RegionLabel::C || label.zero == RegionLabel::D;
        bool in_ab = label.zero == RegionLabel::A || label.zero == RegionLabel::B;
        if (in_cd && (stable >= 50 || radius > 0.99)) continue;
        if (in_ab && (unstable >= 50 || radius < 1.01)) continue;
        if (!in_cd && !in_ab) continue;
        auto path = simulate(p, {1e-3, 1e-3}, 5000, 0.0, 0);
        double tail = 0;
        for (std::size_t t = path.size() - 100; t < path.size(); ++t) tail = std::max(tail, std::abs(path[t].ret));
        if (in_cd) {
            ++stable;
            stable_ok += tail < 1e-6;
        } else {
            ++unstable;
            unstable_ok += tail >= 1e-6;
        }
    }
    return {stable_ok == 50 && unstable_ok == 50,
            "C/D converged " + std::to_string(stable_ok) + "/50, A/B did not converge " +
                std::to_string(unstable_ok) + "/50"};
}

Outcome ac4() {
    ScanConfig low;
    low.fixed = model(0.7, 1, 0);
    for (int i = 0; i < 50; ++i) low.grid.push_back(0.99 * i / 49.0);
    low.iters = 5000;
    low.base_seed = 4;
    double worst = 0;
    for (const auto& pt : bifurcation_scan(low)) worst = std::max(worst, std::abs(pt.final_ret));

    ScanConfig high;
    high.fixed = model(1.1, 1, 0);
    high.grid = {1.2};
    high.base_seed = 5;
    double phi = tanh_root(1.1);
    int settled = 0, total = 0;
    for (const auto& pt : bifurcation_scan(high)) {
        ++total;
        settled += std::abs(std::abs(pt.final_phi) - phi) < 1e-3 && std::abs(pt.final_ret) < 1e-3;
    }
    return {worst < 1e-4 && settled >= 95,
            "alpha=0.7 max |r| " + num(worst) + " over 5000 runs; alpha=1.1 C=1.2 settled " +
                std::to_string(settled) + "/" + std::to_string(total)};
}

// Smallest grid value whose mean std exceeds `level`; +inf if none.
double threshold(const VolatilityScan& s, double level) {
    for (const auto& v : s.summary)
        if (v.mean_std > level) return v.value;
    return INFINITY;
}

Outcome ac5() {
    ScanConfig base;
    base.fixed = model(0.7, 1, 0);
    base.grid = {0.0};
    base.noise_std = 1e-3;
    base.init_r_std = 0.0;
    base.base_seed = 6;
    double baseline = volatility_scan(base).summary[0].mean_std;
    bool ok_base = std::abs(baseline - 1e-3) <= 0.05e-3;

    ScanConfig left = base;
    left.grid.clear();
    for (int i = 0; i <= 14; ++i) left.grid.push_back(0.05 * i);
    auto ls = volatility_scan(left);
    std::vector<double> cs, sd;
    for (const auto& v : ls.summary) {
        cs.push_back(v.value);
        sd.push_back(v.mean_std);
    }
    double rho = spearman(cs, sd);

    ScanConfig right = base;
    right.grid.clear();
    for (int i = 0; i <= 80; ++i) right.grid.push_back(0.05 * i);
    double t07 = threshold(volatility_scan(right), 10 * baseline);
    right.fixed.alpha = 1.1;
    double t11 = threshold(volatility_scan(right), 10 * baseline);
    return {ok_base && rho > 0.9 && t11 > t07,
            "baseline " + num(baseline) + ", spearman " + num(rho) + ", 10x threshold C: alpha=0.7 " +
                num(t07) + ", alpha=1.1 " + num(t11)};
}

Outcome ac6() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> phi(-1, 1), r(-0.5, 0.5), a(0.1, 2), l(0.5, 2);
    double worst = 0;
    bool invariant = true;
    for (int i = 0; i < 10; ++i) {
        auto p = model(a(rng), a(rng), 1.0, l(rng));
        MarketState s{phi(rng), r(rng)};
        double mc = simulate_agents(p, s, 1'000'000, 100 + i);
        worst = std::max(worst, std::abs(mc - aggregate_sentiment(p, s)));
        for (double g : {1.0, 10.0}) {
            auto q = p;
            q.gamma = g;
            invariant = invariant && simulate_agents(q, s, 1'000'000, 100 + i) == mc;
        }
    }
    return {worst < 0.005 && invariant,
            "max |MC - tanh| " + num(worst) + ", gamma-invariant " + (invariant ? "yes" : "no")};
}

Outcome ac7() {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    double drift = 0;
    for (int k = 0; k < 10; ++k) {
        sir::SirParams p{1e-4 + 1e-3 * u(rng), 0.02 + 0.2 * u(rng), 1000 + 9000 * u(rng)};
        for (const auto& s : sir::integrate(p, {p.population - 5, 5, 0}, 0.05, 200, 1))
            drift = std::max(drift, std::abs(s.state.total() - p.population) / p.population);
    }
    bool conserve = drift <= 1e-9;

    double ratio = sir::contagion_ratio_for_final_size(9000, 9, 0.99 * 9000);
    bool ratio_ok = std::abs(ratio - 0.00025) <= 1e-6;

    double r = sir::derive_rates(0.05, 1.0, 19.6).recovery_rate;
    bool r_ok = std::abs(r - 0.05102) <= 1e-5;

    double worst = 0;
    int runs = 0;
    while (runs < 20) {
        sir::SirParams p{1e-4 + 1e-3 * u(rng), 0.05 + 0.2 * u(rng), 1000 + 4000 * u(rng)};
        double i0 = 1 + 9 * u(rng);
        auto fs = sir::final_size(p, i0);
        if (!fs.super_threshold) continue;
        auto path = sir::integrate(p, {p.population - i0, i0, 0}, 0.05, 600, 100);
        double b = path.back().state.recovered + path.back().state.active;
        worst = std::max(worst, std::abs(b - fs.recovered) / fs.recovered);
        ++runs;
    }
    bool final_ok = worst <= 1e-4;
    return {conserve && ratio_ok && r_ok && final_ok,
            "conservation drift " + num(drift) + "; c/r for R=0.99N: " + num(ratio) + " (target 0.00025 +- 1e-6, " +
                (ratio_ok ? "ok" : "MISS") + "); r=" + num(r) + "; final-size rel err " + num(worst)};
}

Outcome ac8() {
    using namespace econ;
    double m1 = contagion_ratio_multiplier(83.49, -48.01, 0.1, 0.2);
    double m2 = contagion_ratio_multiplier(83.49, -48.01, 0.2, 0.3);
    double m3 = predict_author_count(1.36 * 0.05, 1.0);
    return {std::abs(m1 - 2.84) <= 0.01 && std::abs(m2 - 0.534) <= 0.005 && std::abs(m3 - 1.070) <= 0.001,
            "0.1->0.2 " + num(m1) + ", 0.2->0.3 " + num(m2) + ", 5% return " + num(m3)};
}

Outcome ac9() {
    using namespace econ;
    std::mt19937_64 rng(9);
    std::normal_distribution<double> z;
    double worst = 0, j_exact = 0;
    for (int trial = 0; trial < 200; ++trial) {
        auto rp = oracle::random_panel(rng, 2);
        VectorXd y = rp.data.response();
        for (FixedEffects fe : {FixedEffects{}, FixedEffects{true, false}, FixedEffects{false, true},
                                FixedEffects{true, true}}) {
            bool any = fe.group || fe.time;
            MatrixXd x = any ? oracle::lsdv_design(rp.data, rp.regressors, fe.group, fe.time)
                             : rp.data.design(rp.regressors, true);
            MatrixXd bread = oracle::normal_inverse(x);
            VectorXd b = bread * (x.transpose() * y);
            VectorXd u = y - x * b;
            Eigen::Index k = any ? 2 : 3;
            OlsSpec spec;
            spec.regressors = rp.regressors;
            spec.covariance = CovarianceType::Cluster;
            FitResult fit;
            if (any) {
                spec.intercept = false;
                spec.absorbed_dof = absorbed_levels(rp.data, fe);
                fit = ols(within_transform(rp.data, fe), spec);
            } else {
                fit = ols(rp.data, spec);
            }
            MatrixXd v = oracle::cluster_sandwich(x, u, bread, rp.data.clusters(), k);
            worst = std::max(worst, oracle::max_abs_diff(fit.coefficients, b.head(k)));
            worst = std::max(worst, oracle::max_abs_diff(fit.covariance, v.topLeftCorner(k, k)));
        }

        PanelDataset p("y", {"d", "w", "z1", "z2"});
        for (int i = 0; i < 80; ++i) {
            double z1 = z(rng), z2 = z(rng), w = z(rng), e = z(rng);
            double d = 0.8 * z1 - 0.5 * z2 + 0.3 * w + 0.7 * e;
            std::vector<double> row{d, w, z1, z2};
            p.add_row("g" + std::to_string(i % 10), std::to_string(i), 1 + 2 * d - w + e, row);
        }
        IvSpec spec;
        spec.endogenous = {"d"};
        spec.instruments = {"z1", "z2"};
        spec.exogenous = {"w"};
        auto iv = tsls(p, spec);
        std::vector<std::string> zn{"w", "z1", "z2"}, xn{"d", "w"};
        MatrixXd zm = p.design(zn, true), xm = p.design(xn, true);
        VectorXd yy = p.response();
        MatrixXd xhat = zm * oracle::normal_inverse(zm) * (zm.transpose() * xm);
        MatrixXd bread = oracle::normal_inverse(xhat);
        VectorXd b = bread * (xhat.transpose() * yy);
        VectorXd u = yy - xm * b;
        worst = std::max(worst, oracle::max_abs_diff(iv.second_stage.coefficients, b));
        worst = std::max(worst, oracle::max_abs_diff(iv.second_stage.covariance,
                                                     oracle::cluster_sandwich(xhat, u, bread, p.clusters(), 3)));
        spec.instruments = {"z1"};
        j_exact = std::max(j_exact, std::abs(tsls(p, spec).j_statistic));
    }
    double k19 = 100 * (interpret_log_odds(0.19, kPeerOddsDoubling) - 1);
    double k06 = 100 * (interpret_log_odds(0.06, kPeerOddsDoubling) - 1);
    bool pct = std::abs(k19 - 14.1) <= 0.1 && std::abs(k06 - 4.2) <= 0.1;
    return {worst <= 1e-8 && j_exact <= 1e-8 && pct,
            "max deviation " + num(worst) + " over 200 panels; exact-identified |J| " + num(j_exact) + "; " +
                num(k19) + "% and " + num(k06) + "%"};
}

Outcome ac10() {
    using namespace econ;
    synthetic::Truth truth;
    std::mt19937_64 rng(10);
    int covered = 0;
    std::vector<int> per(8, 0);
    for (int trial = 0; trial < 100; ++trial) {
        auto panel = synthetic::generate(rng, truth);
        auto changes = weekly_change_panel(panel.rows, panel.benchmark);
        ContagionOptions copt;
        copt.week_effects = true;
        auto con = estimate_contagion(changes, copt);
        ImpactOptions iopt;
        iopt.instrument = false;
        auto imp = estimate_impact(changes, iopt);
        const auto& ret = imp.equations[0].reduced_form;
        const auto& vol = imp.equations[2].reduced_form;
        struct Check {
            const FitResult* fit;
            const char* name;
            double value;
        };
        const Check checks[] = {{&con, "contagion", truth.c},        {&con, "share", truth.d},
                                {&con, "lag_return", truth.b_return}, {&con, "lag_variance", truth.b_variance},
                                {&ret, "d_omega", truth.g_omega},     {&ret, "d_chi", truth.g_chi},
                                {&vol, "d_omega_abs", truth.h_omega}, {&vol, "d_chi_abs", truth.h_chi}};
        bool all = true;
        for (std::size_t i = 0; i < 8; ++i) {
            bool in = std::abs(checks[i].fit->coef(checks[i].name) - checks[i].value) <= 3 * checks[i].fit->se(checks[i].name);
            per[i] += in;
            all = all && in;
        }
        covered += all;
    }
    // Coverage is judged per coefficient; the joint count is reported alongside.
    std::string detail = "trials covering each coefficient within 3 SE:";
    for (int c : per) detail += " " + std::to_string(c);
    detail += "; all 8 at once: " + std::to_string(covered) + "/100";
    return {*std::min_element(per.begin(), per.end()) >= 95, detail};
}

double brute_best(const MatrixXd& s, Eigen::Index i, std::vector<char>& used) {
    if (i == s.rows()) return 0.0;
    double best = brute_best(s, i + 1, used);
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
        if (used[std::size_t(j)] || s(i, j) <= 0) continue;
        used[std::size_t(j)] = 1;
        best = std::max(best, s(i, j) + brute_best(s, i + 1, used));
        used[std::size_t(j)] = 0;
    }
    return best;
}

Outcome ac11() {
    using namespace match;
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> side(1, 7);
    std::uniform_real_distribution<double> u(0, 1);
    int agree = 0;
    for (int t = 0; t < 100; ++t) {
        MatrixXd s(side(rng), side(rng));
        for (Eigen::Index i = 0; i < s.rows(); ++i)
            for (Eigen::Index j = 0; j < s.cols(); ++j) s(i, j) = u(rng) < 0.2 ? 0.0 : 10 * u(rng);
        std::vector<char> used(std::size_t(s.cols()), 0);
        double best = brute_best(s, 0, used);
        agree += std::abs(optimal_match(s).total_score - best) <= 1e-9 * std::max(1.0, best);
    }

    const std::int64_t day = 86400;
    UserProfile treated, idle, busy;
    treated.user_id = "t";
    idle.user_id = "idle";
    idle.activity = {100 * day};
    busy.user_id = "busy";
    busy.activity = {9 * day + day / 2};
    std::vector<std::int64_t> exposures;
    for (int k = 1; k <= 7; ++k) exposures.push_back(k * day);
    auto di = distances(treated, idle, exposures);
    auto db = distances(treated, busy, exposures);
    bool cap = di.d1.size() == 5 && di.d1[0] == 30.0 && db.d1.size() == 5 && std::abs(db.d1[0] - 2.5) < 1e-12;

    bool buckets = exposure_bucket(1) == 1 && exposure_bucket(3) == 3 && exposure_bucket(5) == 5 &&
                   exposure_bucket(40) == 5;
    try {
        exposure_bucket(0);
        buckets = false;
    } catch (const InvalidArgument&) {
    }
    return {agree == 100 && cap && buckets,
            "exhaustive agreement " + std::to_string(agree) + "/100; D1 cap " + (cap ? "ok" : "wrong") +
                "; buckets " + (buckets ? "ok" : "wrong")};
}

struct Criterion {
    const char* title;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {"pitchfork steady-state counts and phi+", 1, ac1},
        {"Jacobian determinant and trace identities", 1, ac2},
        {"region labels agree with simulation", 10, ac3},
        {"bifurcation scan endpoints", 30, ac4},
        {"volatility scan baseline, monotonicity and thresholds", 60, ac5},
        {"agent Monte Carlo matches the tanh map", 10, ac6},
        {"SIR conservation, final-size inversion and rates", 10, ac7},
        {"contagion and return multipliers", 1, ac8},
        {"econometric estimators against brute-force oracles", 30, ac9},
        {"synthetic-pipeline coefficient recovery", 120, ac10},
        {"matching optimality, D1 cap and buckets", 10, ac11},
    };
    CLI::App app{"acceptance checks"};
    int only = 0;
    app.add_option("--criterion", only, "run a single criterion (1-11)")->check(CLI::Range(1, 11));
    CLI11_PARSE(app, argc, argv);

    bool every = true;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (only != 0 && std::size_t(only) != i + 1) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = all[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool fast = secs < all[i].budget_s;
        const bool pass = o.pass && fast;
        every = every && pass;
        std::printf("AC%zu %s %s: %s [%.2fs, budget %.0fs%s]\n", i + 1, pass ? "PASS" : "FAIL", all[i].title,
                    o.detail.c_str(), secs, all[i].budget_s, fast ? "" : ", OVER BUDGET");
    }
    return every ? 0 : 1;
}
