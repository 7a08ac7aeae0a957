#include "hypflow/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "hypflow/errors.hpp"

namespace hypflow {

double theta_max(const AmbientSpace& amb) {
    return amb.field == Field::R ? M_PI : M_PI_2;
}

namespace {

int tangential_multiplicity(const AmbientSpace& amb) {
    return amb.field == Field::R ? amb.m - 1 : amb.a;
}

double ipow(double x, int k) {
    double y = 1.0;
    for (int i = 0; i < k; ++i) y *= x;
    return y;
}

// int_0^pi sin^q, by the exact descent I_q = (q-1)/q I_{q-2}.
double sin_power_integral(int q) {
    double even = M_PI, odd = 2.0;
    if (q == 0) return even;
    if (q == 1) return odd;
    for (int k = 2; k <= q; ++k) {
        double& v = (k % 2 == 0) ? even : odd;
        v *= static_cast<double>(k - 1) / k;
    }
    return (q % 2 == 0) ? even : odd;
}

void check_profile_domain(const AmbientSpace& amb, int nodes) {
    if (amb.field != Field::R && amb.n != 2)
        throw PreconditionError(
            "equivariant profiles need n = 2 for K != R (the reduced "
            "interval [0, pi/2] only parametrizes the n = 2 orbit space)");
    if (nodes < 16) throw PreconditionError("profiles need at least 16 nodes");
}

} // namespace

// Grid nodes are laid out mirror-exactly: theta_{N-1-j} = Theta - theta_j as
// floating point numbers, so symmetric data produce bitwise symmetric
// geometry.
static std::vector<double> theta_grid(const AmbientSpace& amb, int nodes) {
    const double big = theta_max(amb);
    const double h = big / (nodes - 1);
    std::vector<double> theta(nodes);
    for (int j = 0; 2 * j <= nodes - 1; ++j) {
        theta[j] = j * h;
        theta[nodes - 1 - j] = big - j * h;
    }
    if (nodes % 2 == 1) theta[(nodes - 1) / 2] = 0.5 * big;
    theta.front() = 0.0;
    theta.back() = big;
    return theta;
}

RadialProfile make_profile(const AmbientSpace& amb, std::vector<double> rho) {
    const int nodes = static_cast<int>(rho.size());
    check_profile_domain(amb, nodes);

    RadialProfile p;
    p.amb = amb;
    p.nodes = nodes;
    p.h = theta_max(amb) / (nodes - 1);
    p.theta = theta_grid(amb, nodes);
    p.rho = std::move(rho);

    double sup = 0.0;
    for (const double r : p.rho) {
        if (!(r > 0.0))
            throw PreconditionError("profile must be star-shaped: rho > 0");
        if (!std::isfinite(r))
            throw PreconditionError("profile contains non-finite rho");
        sup = std::max(sup, std::fabs(r));
    }

    // Neumann compatibility at the axis: rho'(0) = rho'(Theta) = 0 is what
    // makes the datum a smooth invariant hypersurface.
    std::vector<double> d1(nodes);
    derivative1(p.rho, p.h, d1);
    const double tol = 1e-4 * std::max(1.0, sup);
    if (std::fabs(d1.front()) > tol || std::fabs(d1.back()) > tol)
        throw PreconditionError(
            "initial profile violates the endpoint Neumann condition "
            "(not a smooth invariant hypersurface)");
    return p;
}

RadialProfile make_profile(const AmbientSpace& amb, int nodes,
                           const std::function<double(double)>& rho_of_theta) {
    check_profile_domain(amb, nodes);
    const auto theta = theta_grid(amb, nodes);
    std::vector<double> rho(nodes);
    for (int j = 0; j < nodes; ++j) rho[j] = rho_of_theta(theta[j]);
    return make_profile(amb, std::move(rho));
}

double phi_from_rho(double rho) {
    if (!(rho > 0.0)) throw DomainError("phi_from_rho: rho must be positive");
    // ln tanh(rho/2); the atanh form avoids the tanh saturation for large rho.
    return rho >= 1.0 ? -2.0 * std::atanh(std::exp(-rho))
                      : std::log(std::tanh(0.5 * rho));
}

double rho_from_phi(double phi) {
    if (!(phi < 0.0)) throw DomainError("rho_from_phi: phi must be negative");
    return std::log1p(std::exp(phi)) - std::log(-std::expm1(phi));
}

// ----------------------------------------------------------------------------
// Finite differences.  All stencils are written in subtract-center form
// sum_k w_k (u_{j+o_k} - u_j) (legitimate because every derivative stencil
// has zero weight sum), so constants are annihilated exactly.  Right-edge
// closures reuse the left weights with negated offsets in the same summation
// order, which makes d(reversed u) the bitwise mirror of d(u).
// ----------------------------------------------------------------------------

namespace {

void require_grid(std::size_t n, double h) {
    if (n < 12) throw PreconditionError("FD grid needs at least 12 nodes");
    if (!(h > 0.0)) throw PreconditionError("FD spacing must be positive");
}

} // namespace

void derivative1(std::span<const double> u, double h, std::span<double> out) {
    require_grid(u.size(), h);
    const std::size_t n = u.size();
    const double inv = 1.0 / (12.0 * h);
    for (std::size_t j = 2; j + 2 < n; ++j) {
        const double a = u[j + 1] - u[j - 1];
        const double b = u[j + 2] - u[j - 2];
        out[j] = (8.0 * a - b) * inv;
    }
    out[0] = (48.0 * (u[1] - u[0]) - 36.0 * (u[2] - u[0]) +
              16.0 * (u[3] - u[0]) - 3.0 * (u[4] - u[0])) * inv;
    out[1] = (-3.0 * (u[0] - u[1]) + 18.0 * (u[2] - u[1]) -
              6.0 * (u[3] - u[1]) + (u[4] - u[1])) * inv;
    out[n - 1] = -(48.0 * (u[n - 2] - u[n - 1]) - 36.0 * (u[n - 3] - u[n - 1]) +
                   16.0 * (u[n - 4] - u[n - 1]) - 3.0 * (u[n - 5] - u[n - 1])) *
                 inv;
    out[n - 2] = -(-3.0 * (u[n - 1] - u[n - 2]) + 18.0 * (u[n - 3] - u[n - 2]) -
                   6.0 * (u[n - 4] - u[n - 2]) + (u[n - 5] - u[n - 2])) *
                 inv;
}

void derivative2(std::span<const double> u, double h, std::span<double> out) {
    require_grid(u.size(), h);
    const std::size_t n = u.size();
    const double inv = 1.0 / (12.0 * h * h);
    for (std::size_t j = 2; j + 2 < n; ++j) {
        const double p1 = (u[j + 1] - u[j]) + (u[j - 1] - u[j]);
        const double p2 = (u[j + 2] - u[j]) + (u[j - 2] - u[j]);
        out[j] = (16.0 * p1 - p2) * inv;
    }
    out[0] = (-154.0 * (u[1] - u[0]) + 214.0 * (u[2] - u[0]) -
              156.0 * (u[3] - u[0]) + 61.0 * (u[4] - u[0]) -
              10.0 * (u[5] - u[0])) * inv;
    out[1] = (10.0 * (u[0] - u[1]) - 4.0 * (u[2] - u[1]) +
              14.0 * (u[3] - u[1]) - 6.0 * (u[4] - u[1]) +
              (u[5] - u[1])) * inv;
    out[n - 1] = (-154.0 * (u[n - 2] - u[n - 1]) + 214.0 * (u[n - 3] - u[n - 1]) -
                  156.0 * (u[n - 4] - u[n - 1]) + 61.0 * (u[n - 5] - u[n - 1]) -
                  10.0 * (u[n - 6] - u[n - 1])) * inv;
    out[n - 2] = (10.0 * (u[n - 1] - u[n - 2]) - 4.0 * (u[n - 3] - u[n - 2]) +
                  14.0 * (u[n - 4] - u[n - 2]) - 6.0 * (u[n - 5] - u[n - 2]) +
                  (u[n - 6] - u[n - 2])) * inv;
}

void derivative3(std::span<const double> u, double h, std::span<double> out) {
    require_grid(u.size(), h);
    const std::size_t n = u.size();
    const double inv = 1.0 / (8.0 * h * h * h);
    for (std::size_t j = 3; j + 3 < n; ++j) {
        out[j] = ((u[j - 3] - u[j + 3]) + 8.0 * (u[j + 2] - u[j - 2]) +
                  13.0 * (u[j - 1] - u[j + 1])) * inv;
    }
    const double inv2 = 1.0 / (h * h * h);
    // second-order closures
    out[0] = (9.0 * (u[1] - u[0]) - 12.0 * (u[2] - u[0]) + 7.0 * (u[3] - u[0]) -
              1.5 * (u[4] - u[0])) * inv2;
    out[1] = (-1.5 * (u[0] - u[1]) - 6.0 * (u[2] - u[1]) +
              3.0 * (u[3] - u[1]) - 0.5 * (u[4] - u[1])) * inv2;
    out[2] = (-0.5 * (u[0] - u[2]) + 1.0 * (u[1] - u[2]) -
              1.0 * (u[3] - u[2]) + 0.5 * (u[4] - u[2])) * inv2;
    out[n - 1] = -(9.0 * (u[n - 2] - u[n - 1]) - 12.0 * (u[n - 3] - u[n - 1]) +
                   7.0 * (u[n - 4] - u[n - 1]) - 1.5 * (u[n - 5] - u[n - 1])) *
                 inv2;
    out[n - 2] = -(-1.5 * (u[n - 1] - u[n - 2]) - 6.0 * (u[n - 3] - u[n - 2]) +
                   3.0 * (u[n - 4] - u[n - 2]) - 0.5 * (u[n - 5] - u[n - 2])) *
                 inv2;
    out[n - 3] = -(-0.5 * (u[n - 1] - u[n - 3]) + 1.0 * (u[n - 2] - u[n - 3]) -
                   1.0 * (u[n - 4] - u[n - 3]) + 0.5 * (u[n - 5] - u[n - 3])) *
                 inv2;
}

namespace {

// Even reflection across both endpoints: index -k maps to k and n-1+k to
// n-1-k.  Valid for S^a-invariant data only (the poles are symmetry axes).
inline std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
    if (i < 0) return static_cast<std::size_t>(-i);
    const auto last = static_cast<std::ptrdiff_t>(n) - 1;
    if (i > last) return static_cast<std::size_t>(2 * last - i);
    return static_cast<std::size_t>(i);
}

} // namespace

void derivative1_even(std::span<const double> u, double h,
                      std::span<double> out) {
    require_grid(u.size(), h);
    const std::size_t n = u.size();
    const double inv = 1.0 / (12.0 * h);
    for (std::size_t j = 0; j < n; ++j) {
        const auto i = static_cast<std::ptrdiff_t>(j);
        const double a = u[reflect(i + 1, n)] - u[reflect(i - 1, n)];
        const double b = u[reflect(i + 2, n)] - u[reflect(i - 2, n)];
        out[j] = (8.0 * a - b) * inv;
    }
}

void derivative2_even(std::span<const double> u, double h,
                      std::span<double> out) {
    require_grid(u.size(), h);
    const std::size_t n = u.size();
    const double inv = 1.0 / (12.0 * h * h);
    for (std::size_t j = 0; j < n; ++j) {
        const auto i = static_cast<std::ptrdiff_t>(j);
        const double p1 = (u[reflect(i + 1, n)] - u[j]) +
                          (u[reflect(i - 1, n)] - u[j]);
        const double p2 = (u[reflect(i + 2, n)] - u[j]) +
                          (u[reflect(i - 2, n)] - u[j]);
        out[j] = (16.0 * p1 - p2) * inv;
    }
}

void derivative3_even(std::span<const double> u, double h,
                      std::span<double> out) {
    require_grid(u.size(), h);
    const std::size_t n = u.size();
    const double inv = 1.0 / (8.0 * h * h * h);
    for (std::size_t j = 0; j < n; ++j) {
        const auto i = static_cast<std::ptrdiff_t>(j);
        out[j] = ((u[reflect(i - 3, n)] - u[reflect(i + 3, n)]) +
                  8.0 * (u[reflect(i + 2, n)] - u[reflect(i - 2, n)]) +
                  13.0 * (u[reflect(i - 1, n)] - u[reflect(i + 1, n)])) *
                 inv;
    }
}

double integrate(std::span<const double> values, double h) {
    require_grid(values.size(), h);
    // Gregory endpoint corrections of degree 5: O(h^6) on smooth data.
    static const double gw[5] = {95.0 / 288.0, 317.0 / 240.0, 23.0 / 30.0,
                                 793.0 / 720.0, 157.0 / 160.0};
    const std::size_t n = values.size();
    double acc = 0.0;
    for (std::size_t j = 0; j < 5; ++j) acc += gw[j] * values[j];
    for (std::size_t j = 5; j + 5 < n; ++j) acc += values[j];
    for (std::size_t j = n - 5; j < n; ++j) acc += gw[n - 1 - j] * values[j];
    return acc * h;
}

// ----------------------------------------------------------------------------
// Slice geometry.
// ----------------------------------------------------------------------------

AngularGrid angular_grid(const AmbientSpace& amb, int nodes) {
    if (nodes < 12) throw PreconditionError("angular grid needs >= 12 nodes");
    const bool real_case = amb.field == Field::R;

    AngularGrid g;
    g.h = theta_max(amb) / (nodes - 1);
    g.q = tangential_multiplicity(amb);
    g.theta = theta_grid(amb, nodes);
    g.s.resize(nodes);
    g.ct.resize(nodes);
    g.w.resize(nodes);

    // Build the angular arrays on the left half and mirror them so that
    // s(Theta - theta) = s(theta) and c_t(Theta - theta) = -c_t(theta) hold
    // bitwise.
    for (int j = 0; 2 * j <= nodes - 1; ++j) {
        const double th = g.theta[j];
        double sj, ctj;
        if (real_case) {
            sj = std::sin(th);
            ctj = j == 0 ? std::numeric_limits<double>::infinity()
                         : std::cos(th) / sj;
        } else {
            const double s2 = std::sin(2.0 * th);
            sj = 0.5 * s2;
            ctj = j == 0 ? std::numeric_limits<double>::infinity()
                         : 2.0 * std::cos(2.0 * th) / s2;
        }
        g.s[j] = sj;
        g.s[nodes - 1 - j] = sj;
        g.ct[j] = ctj;
        g.ct[nodes - 1 - j] = -ctj;
    }
    if (nodes % 2 == 1) g.ct[(nodes - 1) / 2] = 0.0; // exact antisymmetry

    // Normalize int w dtheta = omega_m through the closed form of
    // int s(theta)^q.
    const double sq_int = real_case
                              ? sin_power_integral(g.q)
                              : std::ldexp(sin_power_integral(g.q), -g.q - 1);
    const double c_norm = unit_sphere_volume(amb.m) / sq_int;
    for (int j = 0; j < nodes; ++j) g.w[j] = c_norm * ipow(g.s[j], g.q);
    return g;
}

GeometrySlice geometry_slice(const RadialProfile& profile) {
    const AmbientSpace& amb = profile.amb;
    const int n = profile.nodes;

    AngularGrid ag = angular_grid(amb, n);
    const int q = ag.q;

    GeometrySlice g;
    g.amb = amb;
    g.nodes = n;
    g.h = profile.h;
    g.q = q;
    g.theta = profile.theta;
    g.s = std::move(ag.s);
    g.ct = std::move(ag.ct);
    g.w = std::move(ag.w);
    g.rho = profile.rho;

    g.phi.resize(n);
    for (int j = 0; j < n; ++j) g.phi[j] = phi_from_rho(g.rho[j]);
    g.dphi.resize(n);
    g.d2phi.resize(n);
    derivative1_even(g.phi, g.h, g.dphi);
    derivative2_even(g.phi, g.h, g.d2phi);

    g.ct_dphi.resize(n);
    for (int j = 0; j < n; ++j)
        g.ct_dphi[j] = (j == 0 || j == n - 1) ? g.d2phi[j]     // pole limit
                                              : g.ct[j] * g.dphi[j];

    g.grad_sq.resize(n);
    g.v.resize(n);
    g.sinh_rho.resize(n);
    g.cosh_rho.resize(n);
    g.hb.resize(n);
    g.H.resize(n);
    g.k_rad.resize(n);
    g.k_tan.resize(n);
    g.k_vert.resize(n);
    g.area_el.resize(n);

    for (int j = 0; j < n; ++j) {
        const double du = g.dphi[j];
        const double d2u = g.d2phi[j];
        const double gs = du * du;
        const double v = std::sqrt(1.0 + gs);
        const double sh = std::sinh(g.rho[j]);
        const double ch = std::cosh(g.rho[j]);
        const double hb = hbar(amb, g.rho[j]);

        g.grad_sq[j] = gs;
        g.v[j] = v;
        g.sinh_rho[j] = sh;
        g.cosh_rho[j] = ch;
        g.hb[j] = hb;

        // H = -(u''/v^2 + q c_t u') / (v sinh) + hbar / v; the numerator is
        // the sigma~-trace of the spherical Hessian of the invariant phi.
        const double num = d2u / (v * v) + q * g.ct_dphi[j];
        g.H[j] = -num / (v * sh) + hb / v;

        g.k_rad[j] = -d2u / (v * v * v * sh) + ch / (v * sh);
        g.k_tan[j] = -g.ct_dphi[j] / (v * sh) + ch / (v * sh);
        g.k_vert[j] = ch / (v * sh) + sh / (v * ch);

        g.area_el[j] = v * ipow(sh, amb.m) * ipow(ch, amb.a) * g.w[j];
    }
    return g;
}

double area(const GeometrySlice& slice) {
    return integrate(slice.area_el, slice.h);
}

HessianCheck hessian_relation_check(const AmbientSpace& amb, double lambda,
                                    std::span<const double> u,
                                    std::span<const double> du_exact,
                                    std::span<const double> d2u_exact) {
    if (amb.field == Field::R)
        throw PreconditionError(
            "hessian_relation_check concerns the Berger family (K != R)");
    if (!(lambda > 0.0))
        throw DomainError("Berger parameter lambda must be positive");
    if (u.size() != du_exact.size() || u.size() != d2u_exact.size())
        throw PreconditionError("hessian_relation_check: size mismatch");

    const int n = static_cast<int>(u.size());
    const AngularGrid ag = angular_grid(amb, n);
    const double h = ag.h;
    const int q = amb.a;
    const std::vector<double>& ct = ag.ct;

    std::vector<double> d1(n), d2(n);
    derivative1(u, h, d1);
    derivative2(u, h, d2);

    HessianCheck res{0.0, 0.0};
    for (int j = 0; j < n; ++j) {
        const bool pole = (j == 0 || j == n - 1);
        const double t_fd = pole ? d2[j] : ct[j] * d1[j];
        const double t_ex = pole ? d2u_exact[j] : ct[j] * du_exact[j];

        // Laplacian: u'' + q c_t u' is lambda-independent for invariant u.
        const double lap_fd = d2[j] + q * t_fd;
        const double lap_ex = d2u_exact[j] + q * t_ex;
        res.lap_residual = std::max(res.lap_residual,
                                    std::fabs(lap_fd - lap_ex));

        // |Hess u|^2_lambda = u''^2 + q (c_t u')^2 + 2 a lambda u'^2: the
        // last term is the O'Neill contribution of the fiber directions.
        const double nf = d2[j] * d2[j] + q * t_fd * t_fd +
                          2.0 * amb.a * lambda * d1[j] * d1[j];
        const double ne = d2u_exact[j] * d2u_exact[j] + q * t_ex * t_ex +
                          2.0 * amb.a * lambda * du_exact[j] * du_exact[j];
        res.norm_residual = std::max(res.norm_residual, std::fabs(nf - ne));
    }
    return res;
}

// ----------------------------------------------------------------------------
// Serialization.
// ----------------------------------------------------------------------------

void save_profile(const RadialProfile& profile, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    char line[128];
    std::snprintf(line, sizeof line, "# hypflow-profile v1 field=%s n=%d nodes=%d\n",
                  field_name(profile.amb.field), profile.amb.n, profile.nodes);
    out << line;
    for (int j = 0; j < profile.nodes; ++j) {
        std::snprintf(line, sizeof line, "%a %a\n", profile.theta[j],
                      profile.rho[j]);
        out << line;
    }
    if (!out) throw ConfigError("write to '" + path + "' failed");
}

RadialProfile load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::string header;
    std::getline(in, header);
    char fld[8] = {0};
    int n = 0, nodes = 0;
    if (std::sscanf(header.c_str(), "# hypflow-profile v1 field=%7s n=%d nodes=%d",
                    fld, &n, &nodes) != 3)
        throw ConfigError("'" + path + "': not a hypflow profile");
    const AmbientSpace amb = make_ambient(field_from_string(fld), n);

    std::vector<double> rho;
    rho.reserve(nodes);
    double th = 0.0, r = 0.0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (std::sscanf(line.c_str(), "%la %la", &th, &r) != 2)
            throw ConfigError("'" + path + "': malformed profile line");
        rho.push_back(r);
    }
    if (static_cast<int>(rho.size()) != nodes)
        throw ConfigError("'" + path + "': node count mismatch");
    return make_profile(amb, std::move(rho));
}

} // namespace hypflow
