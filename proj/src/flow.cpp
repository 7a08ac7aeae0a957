#include "hypflow/flow.hpp"

#include <algorithm>
#include <cmath>

#include "hypflow/errors.hpp"

namespace hypflow {

FlowState make_state(const RadialProfile& profile, double t) {
    return FlowState{t, profile, geometry_slice(profile)};
}

namespace {

// Stage profiles during a step bypass make_profile's Neumann screening (the
// flow preserves it; re-checking would only add FD noise sensitivity).
FlowState state_from_phi(const FlowState& base, double t,
                         const std::vector<double>& phi) {
    RadialProfile p;
    p.amb = base.profile.amb;
    p.nodes = base.profile.nodes;
    p.h = base.profile.h;
    p.theta = base.profile.theta;
    p.rho.resize(phi.size());
    for (std::size_t j = 0; j < phi.size(); ++j) {
        if (!(phi[j] < 0.0) || !std::isfinite(phi[j]))
            throw NumericBlowupError(
                "phi left the admissible range (-inf, 0) during a step");
        p.rho[j] = rho_from_phi(phi[j]);
    }
    return FlowState{t, std::move(p), {}};
}

} // namespace

std::vector<double> rhs(const GeometrySlice& slice, const SpeedFunction& speed) {
    const int n = slice.nodes;
    std::vector<double> G(n);
    for (int j = 0; j < n; ++j) {
        const double H = slice.H[j];
        if (!std::isfinite(H))
            throw NumericBlowupError("mean curvature became non-finite");
        if (!(H > 0.0))
            throw FlowBreakdownError(j, H,
                                     "mean convexity lost: H <= 0 at a node");
        const double psi = speed.eval(H);
        G[j] = slice.v[j] / (slice.sinh_rho[j] * psi);
        if (!std::isfinite(G[j]))
            throw NumericBlowupError("flow speed became non-finite");
    }
    return G;
}

std::vector<double> reaction_coefficient(const GeometrySlice& slice,
                                         const SpeedFunction& speed) {
    const int n = slice.nodes;
    const double ma = slice.amb.m + slice.amb.a;
    std::vector<double> r(n);
    for (int j = 0; j < n; ++j) {
        const double H = slice.H[j];
        const double psi = speed.eval(H);
        const double dpsi = speed.deriv(H);
        const double v = slice.v[j];
        const double sh = slice.sinh_rho[j];
        const double ch = slice.cosh_rho[j];
        r[j] = (v * ch / (sh * psi)) * (H * dpsi / psi - 1.0) -
               (dpsi / (psi * psi)) *
                   (ma + slice.amb.a / (ch * ch));
    }
    return r;
}

double stable_dt(const GeometrySlice& slice, const SpeedFunction& speed) {
    // Frozen-coefficient principal symbol of the 4th-order d2 stencil peaks
    // at (16/3)/h^2; RK4's real stability interval is 2.785.
    double dmax = 0.0;
    for (int j = 0; j < slice.nodes; ++j) {
        const double H = slice.H[j];
        if (!(H > 0.0))
            throw FlowBreakdownError(j, H, "stable_dt needs mean convexity");
        const double psi = speed.eval(H);
        const double diff = speed.deriv(H) /
                            (psi * psi * slice.v[j] * slice.v[j] *
                             slice.sinh_rho[j] * slice.sinh_rho[j]);
        dmax = std::max(dmax, diff);
    }
    if (!(dmax > 0.0))
        throw NumericBlowupError("diffusion coefficient vanished");
    return 2.785 * (3.0 / 16.0) * slice.h * slice.h / dmax;
}

FlowState step(const FlowState& state, const SpeedFunction& speed, double dt) {
    if (!(dt > 0.0)) throw StabilityError("step size must be positive");
    const double bound = stable_dt(state.slice, speed);
    if (dt > bound * (1.0 + 1e-9))
        throw StabilityError("dt exceeds the parabolic stability bound");

    const int n = state.slice.nodes;
    const std::vector<double>& phi0 = state.slice.phi;
    std::vector<double> tmp(n), acc(n);

    const std::vector<double> k1 = rhs(state.slice, speed);
    for (int j = 0; j < n; ++j) tmp[j] = phi0[j] + 0.5 * dt * k1[j];
    FlowState s2 = state_from_phi(state, state.t, tmp);
    const std::vector<double> k2 = rhs(geometry_slice(s2.profile), speed);
    for (int j = 0; j < n; ++j) tmp[j] = phi0[j] + 0.5 * dt * k2[j];
    FlowState s3 = state_from_phi(state, state.t, tmp);
    const std::vector<double> k3 = rhs(geometry_slice(s3.profile), speed);
    for (int j = 0; j < n; ++j) tmp[j] = phi0[j] + dt * k3[j];
    FlowState s4 = state_from_phi(state, state.t, tmp);
    const std::vector<double> k4 = rhs(geometry_slice(s4.profile), speed);

    for (int j = 0; j < n; ++j)
        acc[j] = phi0[j] +
                 dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);

    FlowState next = state_from_phi(state, state.t + dt, acc);
    next.slice = geometry_slice(next.profile);
    // Post-step admissibility: the new graph must still be mean convex.
    for (int j = 0; j < n; ++j) {
        if (!(next.slice.H[j] > 0.0))
            throw FlowBreakdownError(j, next.slice.H[j],
                                     "mean convexity lost after a step");
    }
    return next;
}

namespace {

TrajectorySample record_sample(const FlowState& state, double dt_in_effect) {
    const GeometrySlice& g = state.slice;
    const int n = g.nodes;
    TrajectorySample s;
    s.t = state.t;
    s.dt = dt_in_effect;
    s.rho = g.rho;
    s.area = area(g);

    const double ma = g.amb.m + g.amb.a;
    double gs = 0.0, hdev = 0.0, hmin = g.H[0], pc = -1e300, d2 = 0.0;
    double rmin = g.rho[0], rmax = g.rho[0];
    for (int j = 0; j < n; ++j) {
        gs = std::max(gs, g.grad_sq[j]);
        hdev = std::max(hdev, std::fabs(g.H[j] - ma));
        hmin = std::min(hmin, g.H[j]);
        pc = std::max(pc, std::max(g.k_rad[j], g.k_tan[j]));
        if (g.amb.a > 0) pc = std::max(pc, g.k_vert[j]);
        d2 = std::max(d2, std::fabs(g.d2phi[j]));
        rmin = std::min(rmin, g.rho[j]);
        rmax = std::max(rmax, g.rho[j]);
    }
    std::vector<double> d3(n);
    derivative3_even(g.phi, g.h, d3);
    double nd3 = 0.0;
    for (const double x : d3) nd3 = std::max(nd3, std::fabs(x));

    s.v_norm = 0.0; // filled by run(), needs psi(m+a)
    s.sup_grad_sq = gs;
    s.sup_h_dev = hdev;
    s.min_h = hmin;
    s.max_pc = pc;
    s.norm_d2phi = d2;
    s.norm_d3phi = nd3;
    s.rho_min = rmin;
    s.rho_max = rmax;
    return s;
}

} // namespace

Trajectory run(const FlowState& initial, const SpeedFunction& speed,
               const StepControl& control) {
    if (!(control.cfl > 0.0) || control.cfl > 1.0)
        throw ConfigError("cfl must lie in (0, 1]");
    if (!(control.dt_min > 0.0) || !(control.dt_max >= control.dt_min))
        throw ConfigError("need 0 < dt_min <= dt_max");
    if (!(control.t_end > initial.t))
        throw ConfigError("t_end must exceed the initial time");
    if (!(control.out_dt > 0.0)) throw ConfigError("out_dt must be positive");

    Trajectory traj;
    traj.amb = initial.slice.amb;
    traj.speed_label = speed.label;
    traj.psi_ma = speed.eval(static_cast<double>(traj.amb.m + traj.amb.a));
    traj.theta = initial.slice.theta;

    const double ma = traj.amb.m + traj.amb.a;
    auto push = [&](const FlowState& st, double dt) {
        TrajectorySample s = record_sample(st, dt);
        s.v_norm = s.area * std::exp(-ma * st.t / traj.psi_ma);
        traj.samples.push_back(std::move(s));
    };

    FlowState state = initial;
    push(state, 0.0);

    double next_out = (std::floor(initial.t / control.out_dt + 1e-9) + 1.0) *
                      control.out_dt;
    const double eps_end = 1e-12 * std::max(1.0, control.t_end);
    long steps = 0;
    double last_dt = 0.0;
    while (control.t_end - state.t > eps_end) {
        const double bound = control.cfl * stable_dt(state.slice, speed);
        if (bound < control.dt_min)
            throw StabilityError("stable step fell below dt_min");
        double dt = std::min(bound, control.dt_max);
        if (state.t + dt > control.t_end) dt = control.t_end - state.t;
        state = step(state, speed, dt);
        last_dt = dt;
        if (++steps > control.max_steps)
            throw NumericBlowupError("max_steps exceeded before t_end");
        if (control.t_end - state.t <= eps_end) break; // final push below
        if (state.t >= next_out - 1e-12) {
            push(state, dt);
            next_out = (std::floor(state.t / control.out_dt + 1e-9) + 1.0) *
                       control.out_dt;
        }
    }
    if (state.t > traj.samples.back().t) push(state, last_dt);
    return traj;
}

// ----------------------------------------------------------------------------
// Geodesic-sphere ODE, adaptive Cash-Karp RK45.
// ----------------------------------------------------------------------------

std::vector<double> geodesic_sphere_ode(double rho0, const SpeedFunction& speed,
                                        const AmbientSpace& amb,
                                        std::span<const double> times) {
    if (!(rho0 > 0.0)) throw DomainError("geodesic_sphere_ode: rho0 > 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] >= times[i - 1]))
            throw PreconditionError("ODE sample times must be nondecreasing");

    const auto f = [&](double rho) {
        return 1.0 / speed.eval(hbar(amb, rho));
    };

    std::vector<double> out;
    out.reserve(times.size());
    double t = times.empty() ? 0.0 : std::min(0.0, times.front());
    double y = rho0;
    double dt = 1e-3;
    const double rtol = 1e-12, atol = 1e-14;

    for (const double target : times) {
        while (t < target) {
            double h = std::min(dt, target - t);
            // Cash-Karp embedded pair
            const double k1 = f(y);
            const double k2 = f(y + h * (k1 / 5.0));
            const double k3 = f(y + h * (3.0 * k1 + 9.0 * k2) / 40.0);
            const double k4 =
                f(y + h * (3.0 * k1 / 10.0 - 9.0 * k2 / 10.0 + 6.0 * k3 / 5.0));
            const double k5 =
                f(y + h * (-11.0 * k1 / 54.0 + 5.0 * k2 / 2.0 -
                           70.0 * k3 / 27.0 + 35.0 * k4 / 27.0));
            const double k6 =
                f(y + h * (1631.0 * k1 / 55296.0 + 175.0 * k2 / 512.0 +
                           575.0 * k3 / 13824.0 + 44275.0 * k4 / 110592.0 +
                           253.0 * k5 / 4096.0));
            const double y5 = y + h * (37.0 * k1 / 378.0 + 250.0 * k3 / 621.0 +
                                       125.0 * k4 / 594.0 +
                                       512.0 * k6 / 1771.0);
            const double y4 =
                y + h * (2825.0 * k1 / 27648.0 + 18575.0 * k3 / 48384.0 +
                         13525.0 * k4 / 55296.0 + 277.0 * k5 / 14336.0 +
                         k6 / 4.0);
            const double err = std::fabs(y5 - y4);
            const double tol = rtol * std::fabs(y5) + atol;
            if (err <= tol) {
                t += h;
                y = y5;
            }
            const double grow =
                err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
            dt = h * std::clamp(grow, 0.2, 5.0);
            if (!(dt > 1e-15))
                throw NumericBlowupError("ODE step size underflow");
        }
        out.push_back(y);
    }
    return out;
}

} // namespace hypflow
