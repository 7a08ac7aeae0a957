#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hypflow/flow.hpp"
#include "hypflow/geometry.hpp"
#include "hypflow/trajectory.hpp"

namespace hypflow {

// ============================================================================
// Post-hoc diagnostics: exponential rate fits, quasi-local masses and their
// horizon limits, evolution residuals, and the rescaled limit profile.
// All rates are measured against the universal scale psi(m + a): gradient,
// H - (m+a) and the second fundamental form deviations decay like
// exp(-2t/psi(m+a)) (horizontal parts squared: exp(-4t/psi(m+a))), area grows
// like exp((m+a) t / psi(m+a)).
// ============================================================================

struct RateFit {
    double rate = 0.0;     // decay rate r in  y ~ C exp(-r t)
    double t1 = 0.0;       // fit window
    double t2 = 0.0;
    double residual = 0.0; // rms residual of log y against the linear model
};

// Least-squares fit of log(values) ~ log C - rate * t over samples with
// t1 <= t <= t2.  Values must be positive on the window (points below
// `floor` are dropped; FitError if fewer than 3 remain).
RateFit fit_decay(std::span<const double> times, std::span<const double> values,
                  double t1, double t2, double floor = 1e-14);

// Window defaulting: the trailing 60% of the run, but starting no earlier
// than t = 2.
RateFit fit_decay(std::span<const double> times,
                  std::span<const double> values);

struct VolumeGrowth {
    RateFit fit;       // growth rate of area (fit of exp(+r t))
    double v_ratio;    // max/min of the normalized volume series
    bool bounded;      // v_ratio finite and the series stays positive
};

VolumeGrowth volume_growth(const Trajectory& traj);

// Second fundamental form convergence to the unit-speed round values
// (1, ..., 1, 2, ..., 2):
//   horizontal_sq: sup over horizontal pcs of (kappa - 1)^2; target rate
//                  4 / psi(m+a).
//   traceless_sq : K = R only, sup |A - (H/m) id|^2; target 4 / psi(m).
//   vertical_abs : K != R only, sup |kappa_vert - 2| (not squared: the
//                  deviation itself is O(exp(-2t/psi)) through the gradient
//                  term); target 2 / psi(m+a).
struct SecondFFReport {
    RateFit horizontal_sq;
    std::optional<RateFit> traceless_sq;
    std::optional<RateFit> vertical_abs;
};

SecondFFReport second_ff_convergence(const Trajectory& traj);

// ----------------------------------------------------------------------------
// Quasi-local masses.
// ----------------------------------------------------------------------------

// Hawking-type mass (K = R only):
//   Q = |M|^(-1 + 4/m) int |A - (H/m) id|^2 dmu.
double hawking_mass(const GeometrySlice& slice);

// Its horizon limit for the rescaled profile f on the reduced grid:
//   (int e^{m f} dsigma)^{-1+4/m} int e^{(m-2) f} |o-Hess e^{-f}|^2 dsigma,
// with the traceless spherical Hessian of F = e^{-f} equal to
// sqrt((m-1)/m) (F'' - cot(theta) F') in the axial reduction.
double hawking_mass_limit(const AmbientSpace& amb, std::span<const double> f);

// Brown-York-type mass (any K):
//   Q = |M|^(-1 + 2/(m+a)) int (H - hbar(rho)) dmu.
double by_mass(const GeometrySlice& slice);

// Its horizon limit, k = m + a:
//   -(int e^{k f})^{-1+2/k} int e^{(k-2) f} (Delta f + (k/2 - 1)|grad f|^2),
// all on the round reduced sphere.
double by_mass_limit(const AmbientSpace& amb, std::span<const double> f);

// Fills sample.mass along the trajectory: hawking_mass for K = R, by_mass
// otherwise.
void attach_mass_series(Trajectory& traj);

// ----------------------------------------------------------------------------
// Monotonicity-defect bound  dQ/dt >= -c exp(-2t/psi(m+a)).
// ----------------------------------------------------------------------------

struct MassBoundReport {
    double rate = 0.0;       // 2 / psi(m+a)
    double c_fit = 0.0;      // smallest envelope constant c >= 0
    double min_margin = 0.0; // inf_i [ Q_i - (c/rate) exp(-rate t_i) ]
    std::optional<RateFit> neg_fit; // decay fit of the negative part of dQ/dt
    bool compliant = false;
};

MassBoundReport mass_bound_check(const Trajectory& traj);

// ----------------------------------------------------------------------------
// Evolution residuals against adjacent samples (centered in time, O(dt^2)).
// ----------------------------------------------------------------------------

// (Q_{i+1} - Q_i)/dt versus the exact evolution identity for the BY-type
// mass; returns the absolute residual for the pair (i, i+1).
double by_mass_evolution_residual(const Trajectory& traj, std::size_t i,
                                  const SpeedFunction& speed);

// Sup-norm residual of  dH/dt = psi'/psi^2 Delta_g H
//   + (psi'' psi - 2 psi'^2)/psi^3 |grad H|^2_g - (|A|^2 + Ric(nu,nu))/psi
// for the pair (i, i+1).
double evolution_residual_H(const Trajectory& traj, std::size_t i,
                            const SpeedFunction& speed);

// Exact reduced  |A|^2 + Ric(nu, nu)  along a slice (includes the O'Neill
// mixed Hessian terms; reduces to m/sinh^2 - a/cosh^2 on geodesic spheres).
std::vector<double> a2_plus_ricci(const GeometrySlice& slice);

// Induced Laplacian of a scalar sample field along the slice.
std::vector<double> laplacian_graph(const GeometrySlice& slice,
                                    std::span<const double> u);

// ----------------------------------------------------------------------------
// Rescaled limit and roundness classification.
// ----------------------------------------------------------------------------

struct RescaledLimit {
    std::vector<double> f;   // rho(t_end) - rho_tilde
    double rho_tilde = 0.0;  // radius with sphere_area(rho_tilde) = area
    double cauchy = 0.0;     // sup |f(t_end) - f(t_end/2)|
};

// Requires t_end >= 8 / psi(m+a) (PreconditionError otherwise).
RescaledLimit rescaled_limit(const Trajectory& traj);

enum class Verdict { Constant, NonConstant, Indeterminate };

struct YamabeReport {
    Verdict verdict = Verdict::Indeterminate;
    double residual = 0.0;
};

// K = R: relative L^2(w) residual of e^{-f} against span{1, cos(theta)}
// (conformal round factors are exactly the affine functions of cos(theta)).
// K != R: relative L^2(w) deviation of f from its mean.
// residual > 1e-4 -> NonConstant, < 1e-8 -> Constant, else Indeterminate.
YamabeReport yamabe_classify(const AmbientSpace& amb, std::span<const double> f);

} // namespace hypflow
