#include "hypflow/ambient.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "hypflow/errors.hpp"

namespace hypflow {

const char* field_name(Field f) {
    switch (f) {
    case Field::R: return "R";
    case Field::C: return "C";
    case Field::H: return "H";
    }
    return "?";
}

Field field_from_string(const std::string& s) {
    if (s == "R" || s == "r") return Field::R;
    if (s == "C" || s == "c") return Field::C;
    if (s == "H" || s == "h") return Field::H;
    throw ConfigError("unknown field '" + s + "' (expected R, C or H)");
}

AmbientSpace make_ambient(Field field, int n) {
    const int a = field == Field::R ? 0 : field == Field::C ? 1 : 3;
    const int min_n = field == Field::R ? 3 : 2;
    if (n < min_n) {
        std::ostringstream os;
        os << "ambient " << field_name(field) << "H^" << n
           << " not admissible: need n >= " << min_n << " for K = "
           << field_name(field);
        throw PreconditionError(os.str());
    }
    return AmbientSpace{field, n, a, (a + 1) * n - 1};
}

double ambient_ricci(const AmbientSpace& amb) {
    return -static_cast<double>(amb.m + 3 * amb.a);
}

double unit_sphere_volume(int m) {
    if (m < 0) throw DomainError("unit_sphere_volume: m must be >= 0");
    // omega_m = 2 pi / (m-1) * omega_{m-2}; keeps omega_2 = 4 pi, omega_3 =
    // 2 pi^2 etc. exact to rounding without Gamma evaluations.
    double even = 2.0;          // omega_0
    double odd = 2.0 * M_PI;    // omega_1
    if (m == 0) return even;
    if (m == 1) return odd;
    for (int k = 2; k <= m; ++k) {
        double& w = (k % 2 == 0) ? even : odd;
        w *= 2.0 * M_PI / (k - 1);
    }
    return (m % 2 == 0) ? even : odd;
}

double hbar(const AmbientSpace& amb, double rho) {
    if (!(rho > 0.0)) throw DomainError("hbar: rho must be positive");
    const double t = std::tanh(rho);
    return amb.m / t + amb.a * t;
}

double sphere_area(const AmbientSpace& amb, double rho) {
    if (!(rho > 0.0)) throw DomainError("sphere_area: rho must be positive");
    return unit_sphere_volume(amb.m) * std::pow(std::sinh(rho), amb.m) *
           std::pow(std::cosh(rho), amb.a);
}

double curvature_display(const AmbientSpace& amb, const TangentPairing& p) {
    double cc = 0.0;
    for (int i = 0; i < amb.a; ++i) cc += p.x_jy[i] * p.x_jy[i];
    return p.xx * p.yy - p.xy * p.xy + 3.0 * cc;
}

double sectional_curvature(const AmbientSpace& amb, const TangentPairing& p) {
    const double gram = p.xx * p.yy - p.xy * p.xy;
    if (!(gram > 0.0))
        throw DomainError("sectional_curvature: degenerate plane");
    return -curvature_display(amb, p) / gram;
}

// ----------------------------------------------------------------------------
// Speed functions.
// ----------------------------------------------------------------------------

namespace {

SpeedFunction power_sum(std::string label,
                        std::vector<std::pair<double, double>> terms) {
    for (const auto& [c, q] : terms) {
        if (!(c > 0.0))
            throw ConfigError(label + ": coefficients must be positive");
        if (!(q > 0.0))
            throw ConfigError(label + ": exponents must be positive");
    }
    SpeedFunction s;
    s.label = std::move(label);
    s.eval = [terms](double x) {
        double y = 0.0;
        for (const auto& [c, q] : terms) y += c * std::pow(x, q);
        return y;
    };
    s.deriv = [terms](double x) {
        double y = 0.0;
        for (const auto& [c, q] : terms) y += c * q * std::pow(x, q - 1.0);
        return y;
    };
    s.deriv2 = [terms](double x) {
        double y = 0.0;
        for (const auto& [c, q] : terms)
            y += c * q * (q - 1.0) * std::pow(x, q - 2.0);
        return y;
    };
    return s;
}

double parse_double(const std::string& text, const std::string& what) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw ConfigError("cannot parse " + what + " from '" + text + "'");
    }
    if (pos != text.size())
        throw ConfigError("trailing junk in " + what + " '" + text + "'");
    return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(text);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!text.empty() && text.back() == sep) out.push_back("");
    return out;
}

} // namespace

SpeedFunction make_speed(const std::string& text) {
    std::string s = text;
    // trim
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = (b == std::string::npos) ? std::string{} : s.substr(b, e - b + 1);

    if (s == "imcf") {
        SpeedFunction f;
        f.label = "imcf";
        f.eval = [](double x) { return x; };
        f.deriv = [](double) { return 1.0; };
        f.deriv2 = [](double) { return 0.0; };
        return f;
    }
    if (s == "log1p") {
        SpeedFunction f;
        f.label = "log1p";
        f.eval = [](double x) { return std::log1p(x); };
        f.deriv = [](double x) { return 1.0 / (1.0 + x); };
        f.deriv2 = [](double x) { return -1.0 / ((1.0 + x) * (1.0 + x)); };
        return f;
    }
    if (s.rfind("power:", 0) == 0) {
        const double p = parse_double(s.substr(6), "power exponent");
        return power_sum(s, {{1.0, p}});
    }
    if (s.rfind("powersum:", 0) == 0) {
        std::vector<std::pair<double, double>> terms;
        for (const std::string& part : split(s.substr(9), ';')) {
            const auto cp = split(part, ',');
            if (cp.size() != 2)
                throw ConfigError("powersum term '" + part +
                                  "' must be 'c,p'");
            terms.emplace_back(parse_double(cp[0], "powersum coefficient"),
                               parse_double(cp[1], "powersum exponent"));
        }
        if (terms.empty()) throw ConfigError("powersum: no terms");
        return power_sum(s, std::move(terms));
    }
    throw ConfigError("unknown speed '" + s + "'");
}

SpeedFunction make_expm1_speed(double scale, double rate) {
    if (!(scale > 0.0) || !(rate > 0.0))
        throw ConfigError("expm1 speed needs positive scale and rate");
    char buf[64];
    std::snprintf(buf, sizeof buf, "expm1(scale=%g,rate=%g)", scale, rate);
    SpeedFunction f;
    f.label = buf;
    f.eval = [=](double x) { return scale * std::expm1(rate * x); };
    f.deriv = [=](double x) { return scale * rate * std::exp(rate * x); };
    f.deriv2 = [=](double x) {
        return scale * rate * rate * std::exp(rate * x);
    };
    return f;
}

std::vector<double> default_speed_grid() {
    std::vector<double> g(200);
    for (int i = 0; i < 200; ++i)
        g[i] = std::pow(10.0, -4.0 + 7.0 * i / 199.0);
    g.front() = 1e-4;
    g.back() = 1e3;
    return g;
}

namespace {

// psi(0+) by Aitken extrapolation along x_k = 1e-4 * 4^{-k}; exact for
// asymptotically geometric sequences, i.e. psi ~ c x^p.
double limit_at_zero(const SpeedFunction& speed) {
    double a0 = speed.eval(1e-4);
    double a1 = speed.eval(2.5e-5);
    double best = a1;
    double x = 2.5e-5;
    for (int k = 0; k < 18; ++k) {
        x *= 0.25;
        const double a2 = speed.eval(x);
        if (!std::isfinite(a2))
            throw EvaluationError("speed '" + speed.label +
                                  "' not finite near 0");
        const double den = a2 - 2.0 * a1 + a0;
        best = (std::fabs(den) > 1e-300)
                   ? a2 - (a2 - a1) * (a2 - a1) / den
                   : a2;
        a0 = a1;
        a1 = a2;
    }
    return best;
}

} // namespace

ValidationReport validate_speed(const SpeedFunction& speed,
                                std::span<const double> grid) {
    if (grid.empty() || grid.front() > 1.0000001e-4 ||
        grid.back() < 0.9999999e3)
        throw PreconditionError("speed validation grid must span [1e-4, 1e3]");

    ValidationReport report;
    auto flag = [&](const char* cond, double x, double lhs) {
        report.passed = false;
        report.violations.push_back({cond, x, lhs});
    };

    const double psi0 = limit_at_zero(speed);
    if (std::fabs(psi0) > 1e-6) flag("i", 0.0, std::fabs(psi0));

    for (const double x : grid) {
        const double p = speed.eval(x);
        const double dp = speed.deriv(x);
        const double d2p = speed.deriv2(x);
        if (!std::isfinite(p) || !std::isfinite(dp) || !std::isfinite(d2p))
            throw EvaluationError("speed '" + speed.label +
                                  "' not finite at x = " + std::to_string(x));
        if (!(p > 0.0)) flag("i", x, -p);
        if (!(dp > 0.0)) flag("i", x, -dp);
        // ii) x psi' <= psi, iii) psi'' psi <= 2 psi'^2, both up to rounding.
        const double m2 = x * dp - p;
        if (m2 > 1e-10 * std::max(1.0, std::fabs(p))) flag("ii", x, m2);
        const double m3 = d2p * p - 2.0 * dp * dp;
        if (m3 > 1e-10 * std::max(1.0, dp * dp)) flag("iii", x, m3);
    }
    return report;
}

ValidationReport validate_speed(const SpeedFunction& speed) {
    const auto grid = default_speed_grid();
    return validate_speed(speed, grid);
}

} // namespace hypflow
