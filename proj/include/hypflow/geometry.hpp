#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hypflow/ambient.hpp"

namespace hypflow {

// ============================================================================
// Star-shaped profiles and their extrinsic geometry, reduced to one angular
// variable theta.
//
// The rotationally reduced sphere coordinate runs over [0, Theta] with
//   Theta = pi     for K = R (any n),
//   Theta = pi/2   for K = C, H with n = 2.
// On it live
//   s(theta)   = sin(theta)            (K = R)
//              = sin(2 theta) / 2      (K != R)
//   c_t(theta) = s'/s = cot(theta) or 2 cot(2 theta),
//   q          = tangential multiplicity: m - 1 for K = R, a for K != R,
//   w(theta)   = C_K s(theta)^q with normalization int w = omega_m.
// A radial graph rho(theta) over this interval describes an axially
// symmetric (K = R) resp. isoparametric-equivariant (K != R, n = 2)
// hypersurface.  phi = ln tanh(rho/2) is the flat radial variable in which
// the flow becomes a scalar parabolic equation.
// ============================================================================

struct RadialProfile {
    AmbientSpace amb;
    int nodes = 0;              // N >= 16
    double h = 0.0;             // uniform spacing, theta_j = j h
    std::vector<double> theta;
    std::vector<double> rho;
};

double theta_max(const AmbientSpace& amb);

// Builds a profile by sampling rho_of_theta on the uniform grid.  K != R
// requires n == 2 (PreconditionError otherwise); rho must be positive.
RadialProfile make_profile(const AmbientSpace& amb, int nodes,
                           const std::function<double(double)>& rho_of_theta);

// Same, but from an already sampled rho array (nodes = rho.size()).
RadialProfile make_profile(const AmbientSpace& amb, std::vector<double> rho);

// phi = ln tanh(rho/2) and its inverse, evaluated in overflow-safe form.
double phi_from_rho(double rho);
double rho_from_phi(double phi);

// ----------------------------------------------------------------------------
// Finite differences on the uniform theta grid: 4th-order interior stencils
// with one-sided 4th-order closures for the first and second derivative, and
// a 4th-order interior / 2nd-order boundary third derivative.  All stencils
// are evaluated in subtract-center form, which makes them exact annihilators
// of constants in floating point and gives bitwise left/right mirror
// symmetry.
// ----------------------------------------------------------------------------

void derivative1(std::span<const double> u, double h, std::span<double> out);
void derivative2(std::span<const double> u, double h, std::span<double> out);
void derivative3(std::span<const double> u, double h, std::span<double> out);

// Variants for S^a-invariant data, which is even across both endpoints: the
// poles are interior points of the hypersurface, so the data reflects as
// u(-x) = u(x), u(Theta + x) = u(Theta - x) and the centered interior
// stencils apply everywhere (4th order up to the boundary).  One-sided
// closures at a symmetry axis systematically overshoot and feed an unstable
// boundary layer when used inside the flow, so every consumer of validated
// invariant data uses these.  Odd-order derivatives vanish bitwise at the
// poles.
void derivative1_even(std::span<const double> u, double h,
                      std::span<double> out);
void derivative2_even(std::span<const double> u, double h,
                      std::span<double> out);
void derivative3_even(std::span<const double> u, double h,
                      std::span<double> out);

// The reduced-grid node data shared by slices and the limit functionals.
// theta is mirror-exact (theta_{N-1-j} = Theta - theta_j bitwise), s and w
// are even, c_t odd (+-inf at the poles, 0 at an odd grid's midpoint).
struct AngularGrid {
    double h = 0.0;
    int q = 0;
    std::vector<double> theta, s, ct, w;
};

AngularGrid angular_grid(const AmbientSpace& amb, int nodes);

// Gregory endpoint-corrected trapezoid rule of degree 5 (O(h^6)); needs at
// least 12 nodes.
double integrate(std::span<const double> values, double h);

// ----------------------------------------------------------------------------
// Pointwise extrinsic geometry of the graph.
// ----------------------------------------------------------------------------

struct GeometrySlice {
    AmbientSpace amb;
    int nodes = 0;
    double h = 0.0;
    int q = 0; // tangential multiplicity

    std::vector<double> theta;
    std::vector<double> s;        // s(theta)
    std::vector<double> ct;       // c_t = s'/s (+-inf at the poles)
    std::vector<double> w;        // reduced sphere measure, int w = omega_m
    std::vector<double> rho;
    std::vector<double> phi;
    std::vector<double> dphi;     // phi'
    std::vector<double> d2phi;    // phi''
    std::vector<double> ct_dphi;  // c_t phi', with the pole limit phi''
    std::vector<double> grad_sq;  // |grad phi|^2_sigma = phi'^2
    std::vector<double> v;        // sqrt(1 + |grad phi|^2)
    std::vector<double> sinh_rho;
    std::vector<double> cosh_rho;
    std::vector<double> hb;       // hbar(rho)
    std::vector<double> H;        // mean curvature of the graph
    std::vector<double> k_rad;    // principal curvature, radial direction
    std::vector<double> k_tan;    // tangential pc (multiplicity q)
    std::vector<double> k_vert;   // vertical/Hopf pc (multiplicity a)
    std::vector<double> area_el;  // v sinh^m cosh^a w(theta)
};

GeometrySlice geometry_slice(const RadialProfile& profile);

// Total area = int area_el dtheta.
double area(const GeometrySlice& slice);

// ----------------------------------------------------------------------------
// Hessian bookkeeping check on the Berger family.  For K != R, n = 2 the
// canonical metrics sigma_lambda (lambda = 1 the round metric) share the
// Laplacian of equivariant functions,
//   Delta u = u'' + q c_t u',
// while the Hessian norms differ by the O'Neill term:
//   |Hess u|^2_lambda = u''^2 + q (c_t u')^2 + 2 a lambda u'^2.
// The check evaluates both sides from FD data against exact derivatives.
// ----------------------------------------------------------------------------

struct HessianCheck {
    double lap_residual;  // max |FD Laplacian - exact|
    double norm_residual; // max |FD Hessian-norm - exact|
};

HessianCheck hessian_relation_check(const AmbientSpace& amb, double lambda,
                                    std::span<const double> u,
                                    std::span<const double> du_exact,
                                    std::span<const double> d2u_exact);

// ----------------------------------------------------------------------------
// Profile serialization: two hexfloat columns (theta, rho) per line after the
// header
//   # hypflow-profile v1 field=<R|C|H> n=<n> nodes=<N>
// Round-trips bit-exactly.
// ----------------------------------------------------------------------------

void save_profile(const RadialProfile& profile, const std::string& path);
RadialProfile load_profile(const std::string& path);

} // namespace hypflow
