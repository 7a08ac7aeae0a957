#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hypflow {

// ============================================================================
// Ambient rank-one symmetric spaces KH^n of negative curvature.
//
// K is one of R, C, H (quaternions).  With a = dim_R(K) - 1 the real
// dimension of the hyperbolic space is (a+1)n and hypersurfaces have
// dimension m = (a+1)n - 1.  Sectional curvatures lie in [-4, -1] (constant
// -1 for K = R) and the Ricci curvature of the ambient is -(m + 3a) in every
// direction.
// ============================================================================

enum class Field { R, C, H };

const char* field_name(Field f);
Field field_from_string(const std::string& s);

struct AmbientSpace {
    Field field;
    int n; // K-dimension of KH^n
    int a; // dim_R(K) - 1: 0, 1 or 3
    int m; // hypersurface dimension (a+1)n - 1
};

// Throws PreconditionError unless n >= 3 for K = R, n >= 2 otherwise (the
// hypotheses of the main convergence theorem).
AmbientSpace make_ambient(Field field, int n);

// Ricci eigenvalue on unit vectors: the ambient is Einstein with
// Ric = -(m + 3a) g.
double ambient_ricci(const AmbientSpace& amb);

// Volume of the unit m-sphere, exact recursion omega_m = 2*pi/(m-1) *
// omega_{m-2} with omega_0 = 2, omega_1 = 2*pi.
double unit_sphere_volume(int m);

// Mean curvature of the geodesic sphere of radius rho > 0:
//   hbar(rho) = m coth(rho) + a tanh(rho).
double hbar(const AmbientSpace& amb, double rho);

// Area of the geodesic sphere of radius rho:
//   omega_m sinh(rho)^m cosh(rho)^a.
double sphere_area(const AmbientSpace& amb, double rho);

// ----------------------------------------------------------------------------
// Curvature through the J-basis pairing.  For orthonormal X, Y the inputs are
// the metric values g(X,X), g(Y,Y), g(X,Y) and the a values c_i = g(X, J_i Y).
// The display
//   R(X,Y,Y,X) = g_xx g_yy - g_xy^2 + 3 sum_i c_i^2
// is the *negative* of the curvature tensor value, so the sectional curvature
// of the plane is -display / (g_xx g_yy - g_xy^2).
// ----------------------------------------------------------------------------

struct TangentPairing {
    double xx = 1.0;
    double yy = 1.0;
    double xy = 0.0;
    std::array<double, 3> x_jy{0.0, 0.0, 0.0}; // g(X, J_i Y), i < a
};

double curvature_display(const AmbientSpace& amb, const TangentPairing& p);
double sectional_curvature(const AmbientSpace& amb, const TangentPairing& p);

// ----------------------------------------------------------------------------
// Speed functions psi and their admissibility conditions
//   (i)   psi(0) = 0, psi(x) > 0 and psi'(x) > 0 for all x > 0,
//   (ii)  x psi'(x) <= psi(x),
//   (iii) psi''(x) psi(x) <= 2 psi'(x)^2   ... (concavity-type bound)
// checked numerically on a grid.
// ----------------------------------------------------------------------------

struct SpeedFunction {
    std::string label;
    std::function<double(double)> eval;
    std::function<double(double)> deriv;
    std::function<double(double)> deriv2;
};

// Parses "imcf", "power:p", "log1p", "powersum:c1,p1;c2,p2;...".
// Throws ConfigError on malformed input.  Syntactic only: "power:2" parses
// fine and is rejected later by validate_speed.
SpeedFunction make_speed(const std::string& text);

// Speeds not expressible in the CLI grammar, used for negative testing:
// psi(x) = s (e^{k x} - 1).
SpeedFunction make_expm1_speed(double scale, double rate);

struct Violation {
    std::string condition; // "i", "ii" or "iii"
    double x;
    double lhs; // offending quantity (margin that should have been <= 0)
};

struct ValidationReport {
    bool passed = true;
    std::vector<Violation> violations;
};

// Default validation grid: 200 log-spaced points on [1e-4, 1e3].
std::vector<double> default_speed_grid();

// Checks conditions (i)-(iii) on the given grid (must span at least
// [1e-4, 1e3], else PreconditionError).  psi(0+) = 0 is checked by Aitken
// extrapolation of psi along x_k = 1e-4 * 4^{-k}.  Non-finite values raise
// EvaluationError.
ValidationReport validate_speed(const SpeedFunction& speed,
                                std::span<const double> grid);
ValidationReport validate_speed(const SpeedFunction& speed);

} // namespace hypflow
