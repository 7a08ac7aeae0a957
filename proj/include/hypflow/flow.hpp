#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hypflow/geometry.hpp"
#include "hypflow/trajectory.hpp"

namespace hypflow {

// ============================================================================
// The flow dF/dt = nu / psi(H) of a radial graph reduces to the scalar
// equation
//   d phi / dt = G(phi) = v / (sinh(rho) psi(H)),
// integrated here with classical RK4 under an explicit parabolic stability
// bound.
// ============================================================================

struct FlowState {
    double t = 0.0;
    RadialProfile profile;
    GeometrySlice slice; // geometry of `profile`, kept in sync
};

FlowState make_state(const RadialProfile& profile, double t = 0.0);

// Right-hand side G evaluated on a slice.  Throws FlowBreakdownError if H <= 0
// anywhere (the speed is only defined for mean-convex graphs) and
// NumericBlowupError on non-finite values.
std::vector<double> rhs(const GeometrySlice& slice, const SpeedFunction& speed);

// Zeroth-order reaction coefficient dG/dphi at fixed derivatives:
//   (v cosh/ (sinh psi)) (H psi'/psi - 1) - (psi'/psi^2)(m + a + a/cosh^2).
// Tends to -1/psi(m+a) on expanding spheres.
std::vector<double> reaction_coefficient(const GeometrySlice& slice,
                                         const SpeedFunction& speed);

// Largest stable RK4 step for the frozen-coefficient principal part
//   D_j = psi'(H) / (psi(H)^2 v^2 sinh^2 rho),
// i.e. 2.785 / (16/3) * h^2 / max_j D_j.
double stable_dt(const GeometrySlice& slice, const SpeedFunction& speed);

// One RK4 step of size dt.  Rejects dt above the stability bound of the
// initial slice (StabilityError).
FlowState step(const FlowState& state, const SpeedFunction& speed, double dt);

struct StepControl {
    double cfl = 0.5;      // fraction of the stability bound actually used
    double dt_min = 1e-12;
    double dt_max = 0.05;
    double t_end = 10.0;
    long max_steps = 50'000'000;
    double out_dt = 0.25;  // sampling interval (see run)
};

// Integrates from `initial` to t_end with dt = min(cfl * stable_dt, dt_max),
// recording t = 0, the first accepted step at or past each multiple of
// out_dt, and the final time.  No interpolation is performed; sample times
// are the actual step times.
Trajectory run(const FlowState& initial, const SpeedFunction& speed,
               const StepControl& control);

// ----------------------------------------------------------------------------
// Exact geodesic-sphere comparison ODE  rho'(t) = 1 / psi(hbar(rho)),
// integrated with adaptive Cash-Karp RK45 (rtol 1e-12) and sampled exactly at
// the requested times.
// ----------------------------------------------------------------------------

std::vector<double> geodesic_sphere_ode(double rho0, const SpeedFunction& speed,
                                        const AmbientSpace& amb,
                                        std::span<const double> times);

} // namespace hypflow
