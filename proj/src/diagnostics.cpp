#include "hypflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "hypflow/errors.hpp"

namespace hypflow {

namespace {

GeometrySlice slice_at(const Trajectory& traj, std::size_t i) {
    if (i >= traj.samples.size())
        throw PreconditionError("sample index out of range");
    RadialProfile p;
    p.amb = traj.amb;
    p.nodes = static_cast<int>(traj.samples[i].rho.size());
    p.h = theta_max(traj.amb) / (p.nodes - 1);
    p.theta = traj.theta;
    p.rho = traj.samples[i].rho;
    return geometry_slice(p);
}

// sigma-trace reduction u'' + q c_t u' with the L'Hopital pole limit.
std::vector<double> reduce_sigma(const AngularGrid& ag,
                                 std::span<const double> d1,
                                 std::span<const double> d2) {
    const std::size_t n = d1.size();
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        const bool pole = (j == 0 || j + 1 == n);
        out[j] = d2[j] + ag.q * (pole ? d2[j] : ag.ct[j] * d1[j]);
    }
    return out;
}

double require_psi_ma(const Trajectory& traj) {
    if (!(traj.psi_ma > 0.0))
        throw PreconditionError("trajectory lacks the rate scale psi(m+a)");
    return traj.psi_ma;
}

} // namespace

// ----------------------------------------------------------------------------
// Rate fits.
// ----------------------------------------------------------------------------

RateFit fit_decay(std::span<const double> times, std::span<const double> values,
                  double t1, double t2, double floor) {
    if (times.size() != values.size())
        throw PreconditionError("fit_decay: size mismatch");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t1 || times[i] > t2) continue;
        if (!(values[i] > floor)) continue;
        pts.emplace_back(times[i], std::log(values[i]));
    }
    if (pts.size() < 3)
        throw FitError("fit_decay: fewer than 3 usable points in the window");
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double npt = static_cast<double>(pts.size());
    const double den = npt * sxx - sx * sx;
    if (!(std::fabs(den) > 0.0))
        throw FitError("fit_decay: degenerate time window");
    const double slope = (npt * sxy - sx * sy) / den;
    const double icept = (sy - slope * sx) / npt;
    double rss = 0.0;
    for (const auto& [x, y] : pts) {
        const double r = y - (icept + slope * x);
        rss += r * r;
    }
    return RateFit{-slope, t1, t2, std::sqrt(rss / npt)};
}

RateFit fit_decay(std::span<const double> times,
                  std::span<const double> values) {
    if (times.empty()) throw FitError("fit_decay: empty series");
    const double t0 = times.front(), te = times.back();
    const double t1 = std::max(2.0, t0 + 0.4 * (te - t0));
    return fit_decay(times, values, t1, te);
}

VolumeGrowth volume_growth(const Trajectory& traj) {
    std::vector<double> t, a;
    for (const auto& s : traj.samples) {
        t.push_back(s.t);
        a.push_back(s.area);
    }
    RateFit f = fit_decay(t, a);
    f.rate = -f.rate; // growth, not decay

    double vmin = 1e300, vmax = 0.0;
    bool positive = true;
    for (const auto& s : traj.samples) {
        if (!(s.v_norm > 0.0) || !std::isfinite(s.v_norm)) positive = false;
        vmin = std::min(vmin, s.v_norm);
        vmax = std::max(vmax, s.v_norm);
    }
    const double ratio = positive ? vmax / vmin : INFINITY;
    return VolumeGrowth{f, ratio, positive && ratio < 100.0};
}

SecondFFReport second_ff_convergence(const Trajectory& traj) {
    const bool real_case = traj.amb.field == Field::R;
    std::vector<double> t, hor, tra, ver;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const GeometrySlice g = slice_at(traj, i);
        double h2 = 0.0, a2 = 0.0, vd = 0.0;
        for (int j = 0; j < g.nodes; ++j) {
            const double dr = g.k_rad[j] - 1.0;
            const double dtau = g.k_tan[j] - 1.0;
            h2 = std::max(h2, std::max(dr * dr, dtau * dtau));
            if (real_case) {
                // axisymmetric |A - (H/m) id|^2 = (m-1)/m (k_rad - k_tan)^2
                const double d = g.k_rad[j] - g.k_tan[j];
                a2 = std::max(a2, (g.amb.m - 1.0) / g.amb.m * d * d);
            } else {
                vd = std::max(vd, std::fabs(g.k_vert[j] - 2.0));
            }
        }
        t.push_back(traj.samples[i].t);
        hor.push_back(h2);
        tra.push_back(a2);
        ver.push_back(vd);
    }
    SecondFFReport rep;
    rep.horizontal_sq = fit_decay(t, hor);
    if (real_case)
        rep.traceless_sq = fit_decay(t, tra);
    else
        rep.vertical_abs = fit_decay(t, ver);
    return rep;
}

// ----------------------------------------------------------------------------
// Masses.
// ----------------------------------------------------------------------------

double hawking_mass(const GeometrySlice& slice) {
    if (slice.amb.field != Field::R)
        throw PreconditionError("hawking_mass is defined for K = R only");
    const int m = slice.amb.m;
    std::vector<double> integrand(slice.nodes);
    for (int j = 0; j < slice.nodes; ++j) {
        const double d = slice.k_rad[j] - slice.k_tan[j];
        integrand[j] = (m - 1.0) / m * d * d * slice.area_el[j];
    }
    const double A = area(slice);
    return std::pow(A, -1.0 + 4.0 / m) * integrate(integrand, slice.h);
}

double hawking_mass_limit(const AmbientSpace& amb, std::span<const double> f) {
    if (amb.field != Field::R)
        throw PreconditionError("hawking_mass_limit is defined for K = R only");
    const int n = static_cast<int>(f.size());
    const AngularGrid ag = angular_grid(amb, n);
    const int m = amb.m;

    std::vector<double> F(n), d1(n), d2(n);
    for (int j = 0; j < n; ++j) F[j] = std::exp(-f[j]);
    derivative1_even(F, ag.h, d1);
    derivative2_even(F, ag.h, d2);

    std::vector<double> num(n), den(n);
    for (int j = 0; j < n; ++j) {
        const bool pole = (j == 0 || j == n - 1);
        const double t = pole ? 0.0 : d2[j] - ag.ct[j] * d1[j];
        num[j] = std::exp((m - 2.0) * f[j]) * (m - 1.0) / m * t * t * ag.w[j];
        den[j] = std::exp(m * f[j]) * ag.w[j];
    }
    return std::pow(integrate(den, ag.h), -1.0 + 4.0 / m) *
           integrate(num, ag.h);
}

double by_mass(const GeometrySlice& slice) {
    const double k = slice.amb.m + slice.amb.a;
    std::vector<double> integrand(slice.nodes);
    for (int j = 0; j < slice.nodes; ++j)
        integrand[j] = (slice.H[j] - slice.hb[j]) * slice.area_el[j];
    const double A = area(slice);
    return std::pow(A, -1.0 + 2.0 / k) * integrate(integrand, slice.h);
}

double by_mass_limit(const AmbientSpace& amb, std::span<const double> f) {
    const int n = static_cast<int>(f.size());
    const AngularGrid ag = angular_grid(amb, n);
    const double k = amb.m + amb.a;

    std::vector<double> d1(n), d2(n);
    derivative1_even(f, ag.h, d1);
    derivative2_even(f, ag.h, d2);
    const std::vector<double> lap = reduce_sigma(ag, d1, d2);

    std::vector<double> num(n), den(n);
    for (int j = 0; j < n; ++j) {
        num[j] = std::exp((k - 2.0) * f[j]) *
                 (lap[j] + (k / 2.0 - 1.0) * d1[j] * d1[j]) * ag.w[j];
        den[j] = std::exp(k * f[j]) * ag.w[j];
    }
    return -std::pow(integrate(den, ag.h), -1.0 + 2.0 / k) *
           integrate(num, ag.h);
}

void attach_mass_series(Trajectory& traj) {
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const GeometrySlice g = slice_at(traj, i);
        traj.samples[i].mass =
            traj.amb.field == Field::R ? hawking_mass(g) : by_mass(g);
    }
}

// ----------------------------------------------------------------------------
// Monotonicity-defect bound.
// ----------------------------------------------------------------------------

MassBoundReport mass_bound_check(const Trajectory& traj) {
    const double rate = 2.0 / require_psi_ma(traj);
    const std::size_t n = traj.samples.size();
    if (n < 3)
        throw PreconditionError("mass_bound_check needs at least 3 samples");

    std::vector<double> tm, dq, q, t;
    for (std::size_t i = 0; i < n; ++i) {
        if (!traj.samples[i].mass)
            throw PreconditionError("mass series not attached");
        q.push_back(*traj.samples[i].mass);
        t.push_back(traj.samples[i].t);
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        tm.push_back(0.5 * (t[i] + t[i + 1]));
        dq.push_back((q[i + 1] - q[i]) / (t[i + 1] - t[i]));
    }

    MassBoundReport rep;
    rep.rate = rate;

    // smallest c with dQ/dt >= -c e^{-rate t} on every observed increment
    double c = 0.0, dmax = 0.0;
    for (std::size_t i = 0; i < dq.size(); ++i) {
        dmax = std::max(dmax, std::fabs(dq[i]));
        if (dq[i] < 0.0) c = std::max(c, -dq[i] * std::exp(rate * tm[i]));
    }
    rep.c_fit = c;

    // Q can lose at most (c/rate) e^{-rate t} from time t on; the margin
    // below is what survives in the worst case.
    double margin = 1e300;
    for (std::size_t i = 0; i < n; ++i)
        margin = std::min(margin, q[i] - c / rate * std::exp(-rate * t[i]));
    rep.min_margin = margin;

    // Decay fit of the negative part (skipped when it sits at rounding noise).
    const double floor = std::max(1e-12, 1e-9 * dmax);
    std::vector<double> neg(dq.size());
    std::size_t usable = 0;
    for (std::size_t i = 0; i < dq.size(); ++i) {
        neg[i] = dq[i] < 0.0 ? -dq[i] : 0.0;
        if (neg[i] > floor) ++usable;
    }
    bool ok = true;
    if (usable >= 3) {
        try {
            rep.neg_fit = fit_decay(tm, neg, tm.front(), tm.back(), floor);
            ok = rep.neg_fit->rate >= 0.75 * rate;
        } catch (const FitError&) {
            rep.neg_fit.reset();
        }
    }
    rep.compliant = ok && std::isfinite(c);
    return rep;
}

// ----------------------------------------------------------------------------
// Evolution residuals.
// ----------------------------------------------------------------------------

std::vector<double> a2_plus_ricci(const GeometrySlice& g) {
    const double ma = g.amb.m + g.amb.a;
    std::vector<double> out(g.nodes);
    for (int j = 0; j < g.nodes; ++j) {
        const double v = g.v[j];
        const double sh = g.sinh_rho[j];
        const double ch = g.cosh_rho[j];
        const double v2 = v * v;
        // sigma~-contracted Hessian square of phi (Hopf-frame diagonal plus
        // the O'Neill fiber entries 2a phi'^2):
        const double hess2 = g.d2phi[j] * g.d2phi[j] / (v2 * v2) +
                             g.q * g.ct_dphi[j] * g.ct_dphi[j] +
                             2.0 * g.amb.a * g.grad_sq[j];
        out[j] = hess2 / (v2 * sh * sh) +
                 2.0 * ch * g.hb[j] / (v2 * (v + 1.0) * sh) * g.grad_sq[j] -
                 ma / v2 * g.grad_sq[j] +
                 2.0 * ch / (v * sh) * (g.H[j] - g.hb[j]) +
                 g.amb.m / (v2 * sh * sh) - g.amb.a / (v2 * ch * ch);
    }
    return out;
}

namespace {

// Assemble the graph Laplacian from supplied theta-derivatives.
std::vector<double> laplacian_from(const GeometrySlice& g,
                                   std::span<const double> d1,
                                   std::span<const double> d2) {
    std::vector<double> out(g.nodes);
    for (int j = 0; j < g.nodes; ++j) {
        const double v2 = g.v[j] * g.v[j];
        const bool pole = (j == 0 || j == g.nodes - 1);
        double num;
        if (pole) {
            num = (1.0 + g.q) * d2[j];
        } else {
            const double c_eff =
                g.q * g.ct[j] +
                ((g.amb.m - 2.0) * g.cosh_rho[j] +
                 g.amb.a * g.sinh_rho[j] * g.sinh_rho[j] / g.cosh_rho[j]) *
                    g.dphi[j] -
                g.dphi[j] * g.d2phi[j] / v2;
            num = d2[j] + c_eff * d1[j];
        }
        out[j] = num / (v2 * g.sinh_rho[j] * g.sinh_rho[j]);
    }
    return out;
}

// 3-point even-reflection stencils for the residual certificate below. The
// diagnostic is second-order in h by construction so that its refinement
// study follows the advertised O(dt + h^2) law; the geometry pipeline keeps
// the fourth-order stencils.
void d1_even_3pt(std::span<const double> u, double h, std::vector<double>& out) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(u.size());
    auto at = [&](std::ptrdiff_t i) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
        return u[static_cast<std::size_t>(i)];
    };
    for (std::ptrdiff_t j = 0; j < n; ++j)
        out[static_cast<std::size_t>(j)] = (at(j + 1) - at(j - 1)) / (2.0 * h);
}

void d2_even_3pt(std::span<const double> u, double h, std::vector<double>& out) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(u.size());
    auto at = [&](std::ptrdiff_t i) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
        return u[static_cast<std::size_t>(i)];
    };
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        const double c = u[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(j)] =
            ((at(j + 1) - c) + (at(j - 1) - c)) / (h * h);
    }
}

} // namespace

std::vector<double> laplacian_graph(const GeometrySlice& g,
                                    std::span<const double> u) {
    if (static_cast<int>(u.size()) != g.nodes)
        throw PreconditionError("laplacian_graph: size mismatch");
    std::vector<double> d1(g.nodes), d2(g.nodes);
    derivative1_even(u, g.h, d1);
    derivative2_even(u, g.h, d2);
    return laplacian_from(g, d1, d2);
}

namespace {

struct ByRhs {
    double value; // dQ/dt predicted by the evolution identity
};

ByRhs by_rhs(const GeometrySlice& g, const SpeedFunction& speed) {
    const double k = g.amb.m + g.amb.a;
    const int n = g.nodes;
    std::vector<double> i1(n), i2(n), i3(n), i4(n);
    const std::vector<double> a2r = a2_plus_ricci(g);
    for (int j = 0; j < n; ++j) {
        const double psi = speed.eval(g.H[j]);
        const double dmu = g.area_el[j];
        const double hdev = g.H[j] - g.hb[j];
        const double sh = g.sinh_rho[j];
        const double ch = g.cosh_rho[j];
        i1[j] = g.H[j] / psi * dmu;
        i2[j] = hdev * dmu;
        i3[j] = (g.H[j] / psi * hdev - a2r[j] / psi) * dmu;
        // dHhat/dt in the normal gauge used by the other evolution equations:
        // the radial velocity of a point moving with speed 1/psi along nu is
        // <nu, d_rho>/psi = 1/(v psi), not the graph-gauge v/psi.
        i4[j] = 1.0 / (g.v[j] * psi) *
                (g.amb.m / (sh * sh) - g.amb.a / (ch * ch)) * dmu;
    }
    const double A = area(g);
    const double I1 = integrate(i1, g.h);
    const double I2 = integrate(i2, g.h);
    const double I3 = integrate(i3, g.h);
    const double I4 = integrate(i4, g.h);
    const double rhs = std::pow(A, -1.0 + 2.0 / k) *
                       ((-1.0 + 2.0 / k) * I1 * I2 / A + I3 + I4);
    return {rhs};
}

} // namespace

double by_mass_evolution_residual(const Trajectory& traj, std::size_t i,
                                  const SpeedFunction& speed) {
    if (i + 1 >= traj.samples.size())
        throw PreconditionError("need two adjacent samples");
    const GeometrySlice g0 = slice_at(traj, i);
    const GeometrySlice g1 = slice_at(traj, i + 1);
    const double dt = traj.samples[i + 1].t - traj.samples[i].t;
    if (!(dt > 0.0)) throw PreconditionError("degenerate sample spacing");
    const double fd = (by_mass(g1) - by_mass(g0)) / dt;
    const double rhs = 0.5 * (by_rhs(g0, speed).value + by_rhs(g1, speed).value);
    return std::fabs(fd - rhs);
}

double evolution_residual_H(const Trajectory& traj, std::size_t i,
                            const SpeedFunction& speed) {
    if (i + 1 >= traj.samples.size())
        throw PreconditionError("need two adjacent samples");
    const GeometrySlice g0 = slice_at(traj, i);
    const GeometrySlice g1 = slice_at(traj, i + 1);
    const double dt = traj.samples[i + 1].t - traj.samples[i].t;
    if (!(dt > 0.0)) throw PreconditionError("degenerate sample spacing");

    auto rhs_of = [&](const GeometrySlice& g) {
        const int n = g.nodes;
        std::vector<double> d1(n), d2(n), out(n);
        d1_even_3pt(g.H, g.h, d1);
        d2_even_3pt(g.H, g.h, d2);
        const std::vector<double> lap = laplacian_from(g, d1, d2);
        const std::vector<double> a2r = a2_plus_ricci(g);
        for (int j = 0; j < n; ++j) {
            const double psi = speed.eval(g.H[j]);
            const double dpsi = speed.deriv(g.H[j]);
            const double d2psi = speed.deriv2(g.H[j]);
            const double grad_h_sq =
                d1[j] * d1[j] /
                (g.v[j] * g.v[j] * g.sinh_rho[j] * g.sinh_rho[j]);
            // The finite difference below is taken at fixed theta while the
            // evolution equation holds along the normal; a Lagrangian point
            // drifts by theta' = -phi'/(v psi sinh), so the fixed-theta
            // derivative picks up the transport term phi' H' / (v psi sinh).
            const double transport =
                g.dphi[j] * d1[j] / (g.v[j] * psi * g.sinh_rho[j]);
            out[j] = dpsi / (psi * psi) * lap[j] +
                     (d2psi * psi - 2.0 * dpsi * dpsi) / (psi * psi * psi) *
                         grad_h_sq -
                     a2r[j] / psi + transport;
        }
        return out;
    };
    const std::vector<double> r0 = rhs_of(g0);
    const std::vector<double> r1 = rhs_of(g1);
    double worst = 0.0;
    for (int j = 0; j < g0.nodes; ++j) {
        const double fd = (g1.H[j] - g0.H[j]) / dt;
        worst = std::max(worst, std::fabs(fd - 0.5 * (r0[j] + r1[j])));
    }
    return worst;
}

// ----------------------------------------------------------------------------
// Rescaled limit and roundness.
// ----------------------------------------------------------------------------

namespace {

// Radius of the geodesic sphere with the given area: Newton on the log of
// sphere_area, whose derivative is hbar.
double area_radius(const AmbientSpace& amb, double A, double guess) {
    double rho = std::max(guess, 1e-3);
    const double target = std::log(A);
    for (int it = 0; it < 80; ++it) {
        const double val = std::log(sphere_area(amb, rho)) - target;
        if (std::fabs(val) < 1e-14) return rho;
        double next = rho - val / hbar(amb, rho);
        if (!(next > 0.0)) next = 0.5 * rho;
        rho = next;
    }
    throw FitError("area_radius: Newton did not converge");
}

} // namespace

RescaledLimit rescaled_limit(const Trajectory& traj) {
    const double psi_ma = require_psi_ma(traj);
    if (traj.samples.size() < 2)
        throw PreconditionError("rescaled_limit needs at least two samples");
    const double t_end = traj.samples.back().t;
    if (t_end < 8.0 / psi_ma)
        throw PreconditionError("rescaled_limit needs t_end >= 8 / psi(m+a)");

    const auto& last = traj.samples.back();
    // nearest sample to t_end / 2
    std::size_t half = 0;
    double best = 1e300;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const double d = std::fabs(traj.samples[i].t - 0.5 * t_end);
        if (d < best) {
            best = d;
            half = i;
        }
    }

    auto rescale = [&](const TrajectorySample& s) {
        const double guess = 0.5 * (s.rho_min + s.rho_max);
        const double rt = area_radius(traj.amb, s.area, guess);
        std::vector<double> f(s.rho.size());
        for (std::size_t j = 0; j < f.size(); ++j) f[j] = s.rho[j] - rt;
        return std::pair{f, rt};
    };
    auto [f_end, rt_end] = rescale(last);
    auto [f_half, rt_half] = rescale(traj.samples[half]);

    double cauchy = 0.0;
    for (std::size_t j = 0; j < f_end.size(); ++j)
        cauchy = std::max(cauchy, std::fabs(f_end[j] - f_half[j]));

    return RescaledLimit{std::move(f_end), rt_end, cauchy};
}

YamabeReport yamabe_classify(const AmbientSpace& amb,
                             std::span<const double> f) {
    const int n = static_cast<int>(f.size());
    const AngularGrid ag = angular_grid(amb, n);

    auto wint = [&](const std::vector<double>& g) {
        return integrate(g, ag.h);
    };

    double residual;
    if (amb.field == Field::R) {
        // conformal factors of the round metric restricted to the axisym
        // class: e^{-f} affine in cos(theta)
        std::vector<double> F(n), c(n);
        for (int j = 0; j < n; ++j) {
            F[j] = std::exp(-f[j]);
            c[j] = std::cos(ag.theta[j]);
        }
        std::vector<double> g11(n), g12(n), g22(n), b1(n), b2(n), ff(n);
        for (int j = 0; j < n; ++j) {
            const double w = ag.w[j];
            g11[j] = w;
            g12[j] = c[j] * w;
            g22[j] = c[j] * c[j] * w;
            b1[j] = F[j] * w;
            b2[j] = F[j] * c[j] * w;
            ff[j] = F[j] * F[j] * w;
        }
        const double A11 = wint(g11), A12 = wint(g12), A22 = wint(g22);
        const double B1 = wint(b1), B2 = wint(b2), FF = wint(ff);
        const double det = A11 * A22 - A12 * A12;
        const double alpha = (B1 * A22 - B2 * A12) / det;
        const double beta = (A11 * B2 - A12 * B1) / det;
        std::vector<double> rr(n);
        for (int j = 0; j < n; ++j) {
            const double r = F[j] - alpha - beta * c[j];
            rr[j] = r * r * ag.w[j];
        }
        residual = std::sqrt(std::max(0.0, wint(rr)) / FF);
    } else {
        // no conformal freedom in the invariant Berger class: constant
        // scalar curvature needs f itself constant
        std::vector<double> fw(n), ww(n);
        for (int j = 0; j < n; ++j) {
            fw[j] = f[j] * ag.w[j];
            ww[j] = ag.w[j];
        }
        const double mean = wint(fw) / wint(ww);
        std::vector<double> dev(n);
        for (int j = 0; j < n; ++j) {
            const double d = f[j] - mean;
            dev[j] = d * d * ag.w[j];
        }
        residual = std::sqrt(std::max(0.0, wint(dev)) / wint(ww)) /
                   std::max(1.0, std::fabs(mean));
    }

    Verdict v = Verdict::Indeterminate;
    if (residual > 1e-4)
        v = Verdict::NonConstant;
    else if (residual < 1e-8)
        v = Verdict::Constant;
    return YamabeReport{v, residual};
}

} // namespace hypflow
