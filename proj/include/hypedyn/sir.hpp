#pragma once

#include <cstddef>
#include <vector>

namespace hypedyn::sir {

/// Homogeneous-mixing contagion of asset interest:
///   dV/dt = -c A V,  dA/dt = c A V - r A,  dB/dt = r A.
struct SirParams {
    double contagion_rate = 0.0;  ///< c
    double recovery_rate = 1.0;   ///< r
    double population = 1.0;      ///< N

    void validate() const;
};

struct SirState {
    double susceptible = 0.0;  ///< V
    double active = 0.0;       ///< A
    double recovered = 0.0;    ///< B

    [[nodiscard]] double total() const { return susceptible + active + recovered; }
};

struct SirSample {
    double t = 0.0;
    SirState state;
};

struct ContagionRates {
    double contagion_rate = 0.0;
    double recovery_rate = 0.0;
};

struct Threshold {
    double r0 = 0.0;
    bool outbreak = false;
};

struct FinalSize {
    double recovered = 0.0;       ///< R_inf
    bool super_threshold = false; ///< c (N - I0) / r > 1
};

/// Headline contagion rate reported alongside the tail-ticker calibration.
/// It does not equal the product of the reported transmissibility and
/// contact rate; kept for reference only.
inline constexpr double kReportedContagionRate = 9.8e-7;

/// Fixed-step RK4 from t = 0 to `horizon`. The last step is shortened to
/// land on `horizon`. Every `record_stride`-th step is kept (the first and
/// last sample always are). Throws NumericalError if a compartment drops
/// below -1e-12 N or V + A + B drifts from N by more than 1e-9 N.
std::vector<SirSample> integrate(const SirParams& params, const SirState& init, double dt,
                                 double horizon, std::size_t record_stride = 1);

/// c = tau * contact_rate, r = 1 / infectious_period.
ContagionRates derive_rates(double transmissibility, double contact_rate,
                            double infectious_period);

/// R0 = c V0 / r; outbreak iff R0 > 1.
Threshold outbreak_threshold(const SirParams& params, double initial_susceptible);

/// Solves (c / r) R = log((N - I0) / (N - R)) for R in (I0, N) by bisection.
FinalSize final_size(const SirParams& params, double initial_active);

/// c / r implied by a final size: log((N - I0) / (N - R_inf)) / R_inf.
double contagion_ratio_for_final_size(double population, double initial_active,
                                      double final_recovered);

/// Active share A(t) / N0 from V0 = N0 - A0, B0 = 0.
std::vector<SirSample> forecast_interest(const SirParams& params, double initial_active,
                                         double horizon, double dt);

}  // namespace hypedyn::sir
