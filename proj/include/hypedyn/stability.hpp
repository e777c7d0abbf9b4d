#pragma once

#include "hypedyn/dynamics.hpp"

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace hypedyn {

enum class SteadyKind { Zero, Positive, Negative };

/// Fixed point (phi, 0) of the map; phi solves tanh(alpha * phi / lambda) = phi.
struct SteadyState {
    double phi = 0.0;
    double ret = 0.0;
    SteadyKind kind = SteadyKind::Zero;
};

struct Jacobian2x2 {
    double a11 = 0.0, a12 = 0.0;
    double a21 = 0.0, a22 = 0.0;

    [[nodiscard]] double trace() const { return a11 + a22; }
    [[nodiscard]] double determinant() const { return a11 * a22 - a12 * a21; }
};

struct EigenPair {
    std::complex<double> first;
    std::complex<double> second;

    [[nodiscard]] bool is_complex() const { return first.imag() != 0.0; }
    [[nodiscard]] double spectral_radius() const;
};

enum class StabilityClass { StableNode, StableFocus, UnstableNode, UnstableFocus, Saddle };

/// A-E label the zero steady state, F-I the symmetric nonzero pair.
enum class RegionLabel { A, B, C, D, E, F, G, H, I };

struct RegionLabels {
    RegionLabel zero;
    std::optional<RegionLabel> nonzero;
};

/// How `classify` treats a modulus within tolerance of 1.
enum class BoundaryPolicy {
    Throw,     ///< raise BoundaryCase
    Unstable,  ///< count the eigenvalue as outside the unit circle
};

struct SolverOptions {
    double root_tolerance = 1e-12;
    int max_iterations = 200;
    double bifurcation_band = 1e-9;  ///< |alpha/lambda - 1| below this reports "at bifurcation"
};

std::string_view to_string(SteadyKind kind);
std::string_view to_string(StabilityClass cls);
std::string_view to_string(RegionLabel label);

/// True when alpha/lambda lies within the bifurcation band around 1.
bool at_pitchfork(const ModelParams& params, const SolverOptions& opts = {});

/// {(0,0)} for alpha/lambda <= 1, otherwise {(0,0), (phi+,0), (phi-,0)}.
/// phi+ is found by bisection on (1e-9, 1).
std::vector<SteadyState> steady_states(const ModelParams& params, const SolverOptions& opts = {});

/// Jacobian of (phi, r) -> (phi', r') at a steady state, evaluated on the
/// lambda-normalized parameters. Throws if `s` is not a steady state.
Jacobian2x2 jacobian_at(const ModelParams& params, const SteadyState& s);

/// Roots of x^2 - tr(J) x + det(J). Real roots are ordered descending;
/// a complex pair is returned with positive imaginary part first.
EigenPair eigenvalues(const Jacobian2x2& j);

StabilityClass classify(const EigenPair& e, double tolerance = 1e-9,
                        BoundaryPolicy policy = BoundaryPolicy::Throw);

RegionLabels region_label(const ModelParams& params, double tolerance = 1e-9,
                          BoundaryPolicy policy = BoundaryPolicy::Throw);

enum class BoundaryKind {
    Discriminant,         ///< real <-> complex switch
    UnitModulusComplex,   ///< complex pair crosses the unit circle (Cbeta * sech^2 = 1)
    UnitModulusReal,      ///< a real eigenvalue crosses |x| = 1
};

struct BoundaryPoint {
    double alpha = 0.0;
    double cbeta = 0.0;
    BoundaryKind kind = BoundaryKind::Discriminant;
    bool nonzero_state = false;  ///< curve belongs to (phi+-, 0)
};

std::string_view to_string(BoundaryKind kind);

/// Region boundaries in the (alpha, C*beta) plane for lambda = 1.
/// alpha values without a root in (0, cbeta_max] contribute no point to
/// that curve. `scan_points` controls the bracketing grid for the real case.
std::vector<BoundaryPoint> trace_region_boundaries(std::span<const double> alpha_grid,
                                                   double cbeta_max,
                                                   std::size_t scan_points = 4000);

struct PhaseBox {
    double r_min = -1.0, r_max = 1.0;
    double phi_min = -1.0, phi_max = 1.0;
};

struct FieldSample {
    double r = 0.0, phi = 0.0;
    double dr = 0.0, dphi = 0.0;
};

struct PhasePortrait {
    std::vector<FieldSample> field;
    std::vector<std::vector<MarketState>> trajectories;
};

/// Continualized flow x' = F(x) - x of the discrete map F.
MarketState continuous_field(const ModelParams& params, const MarketState& x);

/// Vector field on a grid_n x grid_n lattice plus RK4 trajectories
/// (step h) of the continualized flow from each start.
PhasePortrait phase_portrait(const ModelParams& params, const PhaseBox& box, std::size_t grid_n,
                             std::span<const MarketState> starts, std::size_t steps = 200,
                             double h = 0.05);

}  // namespace hypedyn
