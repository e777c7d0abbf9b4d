#include "hypedyn/stability.hpp"

#include "hypedyn/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace hypedyn {

namespace {

double sech2(double x) {
    const double c = std::cosh(x);
    return 1.0 / (c * c);
}

// Positive root of tanh(a * phi) = phi for a > 1.
double positive_root(double a, const SolverOptions& opts) {
    auto f = [a](double phi) { return std::tanh(a * phi) - phi; };
    double lo = 1e-9;
    double hi = 1.0;
    if (!(f(lo) > 0.0 && f(hi) < 0.0)) {
        throw NumericalError("steady_states: root of tanh(a*phi) = phi is not bracketed");
    }
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < opts.max_iterations; ++it) {
        mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0 || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
            break;
        }
        (fm > 0.0 ? lo : hi) = mid;
    }
    if (std::abs(f(mid)) >= opts.root_tolerance) {
        throw NumericalError("steady_states: bisection did not reach the root tolerance");
    }
    return mid;
}

// Eigenvalue pair for trace/determinant of the form used at every steady state.
EigenPair eigen_from(double trace, double det) {
    const double disc = trace * trace - 4.0 * det;
    if (disc < 0.0) {
        const double re = 0.5 * trace;
        const double im = 0.5 * std::sqrt(-disc);
        return {{re, im}, {re, -im}};
    }
    const double sq = std::sqrt(disc);
    const double q = 0.5 * (trace + std::copysign(sq, trace));
    double x1 = q;
    double x2 = q != 0.0 ? det / q : 0.5 * (trace - sq);
    if (x2 > x1) {
        std::swap(x1, x2);
    }
    return {{x1, 0.0}, {x2, 0.0}};
}

RegionLabel zero_label(StabilityClass c) {
    switch (c) {
        case StabilityClass::UnstableNode: return RegionLabel::A;
        case StabilityClass::UnstableFocus: return RegionLabel::B;
        case StabilityClass::StableFocus: return RegionLabel::C;
        case StabilityClass::StableNode: return RegionLabel::D;
        case StabilityClass::Saddle: return RegionLabel::E;
    }
    throw NumericalError("unreachable stability class");
}

RegionLabel nonzero_label(StabilityClass c) {
    switch (c) {
        case StabilityClass::UnstableNode: return RegionLabel::F;
        case StabilityClass::UnstableFocus: return RegionLabel::G;
        case StabilityClass::StableFocus: return RegionLabel::H;
        case StabilityClass::StableNode: return RegionLabel::I;
        case StabilityClass::Saddle: break;
    }
    // 1 - T + D = 1 - alpha*sech^2 > 0 at phi+, so no real root exceeds 1.
    throw NumericalError("saddle at a nonzero steady state");
}

}  // namespace

double EigenPair::spectral_radius() const { return std::max(std::abs(first), std::abs(second)); }

std::string_view to_string(SteadyKind kind) {
    switch (kind) {
        case SteadyKind::Zero: return "zero";
        case SteadyKind::Positive: return "positive";
        case SteadyKind::Negative: return "negative";
    }
    return "?";
}

std::string_view to_string(StabilityClass cls) {
    switch (cls) {
        case StabilityClass::StableNode: return "stable_node";
        case StabilityClass::StableFocus: return "stable_focus";
        case StabilityClass::UnstableNode: return "unstable_node";
        case StabilityClass::UnstableFocus: return "unstable_focus";
        case StabilityClass::Saddle: return "saddle";
    }
    return "?";
}

std::string_view to_string(RegionLabel label) {
    static constexpr std::string_view names[] = {"A", "B", "C", "D", "E", "F", "G", "H", "I"};
    return names[static_cast<int>(label)];
}

std::string_view to_string(BoundaryKind kind) {
    switch (kind) {
        case BoundaryKind::Discriminant: return "discriminant";
        case BoundaryKind::UnitModulusComplex: return "unit_modulus_complex";
        case BoundaryKind::UnitModulusReal: return "unit_modulus_real";
    }
    return "?";
}

bool at_pitchfork(const ModelParams& params, const SolverOptions& opts) {
    const ModelParams p = params.normalized();
    return std::abs(p.alpha - 1.0) <= opts.bifurcation_band;
}

std::vector<SteadyState> steady_states(const ModelParams& params, const SolverOptions& opts) {
    const ModelParams p = params.normalized();
    std::vector<SteadyState> out{{0.0, 0.0, SteadyKind::Zero}};
    if (p.alpha <= 1.0 + opts.bifurcation_band) {
        return out;
    }
    const double phi = positive_root(p.alpha, opts);
    out.push_back({phi, 0.0, SteadyKind::Positive});
    out.push_back({-phi, 0.0, SteadyKind::Negative});
    return out;
}

Jacobian2x2 jacobian_at(const ModelParams& params, const SteadyState& s) {
    const ModelParams p = params.normalized();
    detail::require(std::isfinite(s.phi), "steady state must be finite");
    const double residual = std::abs(std::tanh(p.alpha * s.phi) - s.phi);
    if (s.ret != 0.0 || residual >= 1e-9) {
        throw InvalidArgument("jacobian_at: (" + std::to_string(s.phi) + ", " +
                              std::to_string(s.ret) + ") is not a steady state");
    }
    const double w = sech2(p.alpha * s.phi);
    const double c = p.capacity;
    return {p.alpha * w, p.beta * w, c * (p.alpha * w - 1.0), c * p.beta * w};
}

EigenPair eigenvalues(const Jacobian2x2& j) {
    detail::require(std::isfinite(j.a11) && std::isfinite(j.a12) && std::isfinite(j.a21) &&
                        std::isfinite(j.a22),
                    "Jacobian entries must be finite");
    return eigen_from(j.trace(), j.determinant());
}

StabilityClass classify(const EigenPair& e, double tolerance, BoundaryPolicy policy) {
    auto outside = [&](std::complex<double> x) {
        const double m = std::abs(x);
        if (std::abs(m - 1.0) <= tolerance) {
            if (policy == BoundaryPolicy::Throw) {
                throw BoundaryCase("eigenvalue modulus " + std::to_string(m) +
                                   " is on the unit circle");
            }
            return true;
        }
        return m > 1.0;
    };
    const bool out1 = outside(e.first);
    const bool out2 = outside(e.second);
    if (out1 != out2) {
        return StabilityClass::Saddle;
    }
    if (out1) {
        return e.is_complex() ? StabilityClass::UnstableFocus : StabilityClass::UnstableNode;
    }
    return e.is_complex() ? StabilityClass::StableFocus : StabilityClass::StableNode;
}

RegionLabels region_label(const ModelParams& params, double tolerance, BoundaryPolicy policy) {
    const auto states = steady_states(params);
    RegionLabels labels{zero_label(classify(eigenvalues(jacobian_at(params, states.front())),
                                            tolerance, policy)),
                        std::nullopt};
    if (states.size() > 1) {
        labels.nonzero = nonzero_label(
            classify(eigenvalues(jacobian_at(params, states[1])), tolerance, policy));
    }
    return labels;
}

std::vector<BoundaryPoint> trace_region_boundaries(std::span<const double> alpha_grid,
                                                   double cbeta_max, std::size_t scan_points) {
    detail::require(std::is_sorted(alpha_grid.begin(), alpha_grid.end()),
                    "alpha grid must be sorted");
    detail::require(cbeta_max > 0.0 && std::isfinite(cbeta_max), "cbeta_max must be positive");
    detail::require(scan_points >= 2, "scan_points must be >= 2");

    std::vector<BoundaryPoint> out;
    for (double alpha : alpha_grid) {
        detail::require(alpha >= 0.0 && std::isfinite(alpha), "alpha grid must be non-negative");

        // sech^2 weight at each steady state: 1 at the origin, 1 - phi+^2 at phi+-.
        std::vector<std::pair<double, bool>> weights{{1.0, false}};
        if (alpha > 1.0 + 1e-9) {
            const double phi = positive_root(alpha, SolverOptions{});
            weights.emplace_back(sech2(alpha * phi), true);
        }

        for (auto [w, nonzero] : weights) {
            // w (cb + alpha)^2 = 4 cb  <=>  cb^2 + (2 alpha - 4 / w) cb + alpha^2 = 0
            const double b = 2.0 * alpha - 4.0 / w;
            const double delta = b * b - 4.0 * alpha * alpha;
            if (delta >= 0.0) {
                const double sq = std::sqrt(delta);
                std::vector<double> roots{0.5 * (-b + sq)};
                if (delta > 0.0) {
                    roots.push_back(0.5 * (-b - sq));
                }
                std::sort(roots.begin(), roots.end());
                for (double cb : roots) {
                    if (cb >= 0.0 && cb <= cbeta_max) {
                        out.push_back({alpha, cb, BoundaryKind::Discriminant, nonzero});
                    }
                }
            }

            // Complex pair has modulus^2 = det = cb * w; complex at cb = 1/w iff alpha*w < 1.
            const double cb_unit = 1.0 / w;
            if (alpha * w < 1.0 && cb_unit <= cbeta_max) {
                out.push_back({alpha, cb_unit, BoundaryKind::UnitModulusComplex, nonzero});
            }

            // Real branch: bracket |x|max - 1 sign changes on a grid, refine by bisection.
            auto radius_minus_one = [&](double cb) -> std::optional<double> {
                const double t = w * (cb + alpha);
                const double d = cb * w;
                if (t * t - 4.0 * d < 0.0) {
                    return std::nullopt;
                }
                return eigen_from(t, d).spectral_radius() - 1.0;
            };
            const double dx = cbeta_max / static_cast<double>(scan_points - 1);
            for (std::size_t i = 0; i + 1 < scan_points; ++i) {
                double lo = dx * static_cast<double>(i);
                double hi = dx * static_cast<double>(i + 1);
                const auto flo = radius_minus_one(lo);
                const auto fhi = radius_minus_one(hi);
                if (!flo || !fhi || (*flo > 0.0) == (*fhi > 0.0)) {
                    continue;
                }
                const bool lo_positive = *flo > 0.0;
                while (hi - lo > 1e-10) {
                    const double mid = 0.5 * (lo + hi);
                    const auto fm = radius_minus_one(mid);
                    if (!fm) {
                        break;
                    }
                    ((*fm > 0.0) == lo_positive ? lo : hi) = mid;
                }
                out.push_back({alpha, 0.5 * (lo + hi), BoundaryKind::UnitModulusReal, nonzero});
            }
        }
    }
    return out;
}

MarketState continuous_field(const ModelParams& params, const MarketState& x) {
    const double next_phi = std::tanh((params.beta * x.ret + params.alpha * x.phi) / params.lambda);
    const double next_r = params.capacity * (next_phi - x.phi);
    return {next_phi - x.phi, next_r - x.ret};
}

PhasePortrait phase_portrait(const ModelParams& params, const PhaseBox& box, std::size_t grid_n,
                             std::span<const MarketState> starts, std::size_t steps, double h) {
    params.validate();
    detail::require(box.r_max > box.r_min && box.phi_max > box.phi_min,
                    "phase box must be non-degenerate");
    detail::require(grid_n >= 2, "grid_n must be >= 2");
    detail::require(h > 0.0 && std::isfinite(h), "step h must be positive");

    PhasePortrait out;
    out.field.reserve(grid_n * grid_n);
    const double dr = (box.r_max - box.r_min) / static_cast<double>(grid_n - 1);
    const double dphi = (box.phi_max - box.phi_min) / static_cast<double>(grid_n - 1);
    for (std::size_t i = 0; i < grid_n; ++i) {
        for (std::size_t j = 0; j < grid_n; ++j) {
            const MarketState x{box.phi_min + dphi * static_cast<double>(j),
                                box.r_min + dr * static_cast<double>(i)};
            const MarketState v = continuous_field(params, x);
            out.field.push_back({x.ret, x.phi, v.ret, v.phi});
        }
    }

    auto axpy = [](const MarketState& x, double a, const MarketState& k) {
        return MarketState{x.phi + a * k.phi, x.ret + a * k.ret};
    };
    for (const MarketState& start : starts) {
        detail::require(std::isfinite(start.phi) && std::isfinite(start.ret),
                        "trajectory start must be finite");
        std::vector<MarketState> path{start};
        path.reserve(steps + 1);
        MarketState x = start;
        for (std::size_t s = 0; s < steps; ++s) {
            const MarketState k1 = continuous_field(params, x);
            const MarketState k2 = continuous_field(params, axpy(x, 0.5 * h, k1));
            const MarketState k3 = continuous_field(params, axpy(x, 0.5 * h, k2));
            const MarketState k4 = continuous_field(params, axpy(x, h, k3));
            x.phi += h / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
            x.ret += h / 6.0 * (k1.ret + 2.0 * k2.ret + 2.0 * k3.ret + k4.ret);
            path.push_back(x);
        }
        out.trajectories.push_back(std::move(path));
    }
    return out;
}

}  // namespace hypedyn
