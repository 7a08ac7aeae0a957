#include <cmath>
#include <vector>

#include <doctest.h>

#include "hypflow/diagnostics.hpp"
#include "hypflow/errors.hpp"
#include "hypflow/flow.hpp"
#include "oracle.hpp"

using namespace hypflow;

namespace {

double rel(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

std::vector<double> sample_family(const oracle::Family& fam,
                                  const AmbientSpace& amb, int N) {
    const auto g = angular_grid(amb, N);
    std::vector<double> f(N);
    for (int j = 0; j < N; ++j) f[j] = fam.f(g.theta[j]);
    return f;
}

Trajectory run_case(Field field, int n, const char* speed_text, int N,
                    std::function<double(double)> rho0, StepControl ctl) {
    const auto amb = make_ambient(field, n);
    const auto st = make_state(make_profile(amb, N, rho0));
    return run(st, make_speed(speed_text), ctl);
}

Trajectory sphere_run(double t_end, int N = 64) {
    StepControl ctl;
    ctl.t_end = t_end;
    return run_case(Field::R, 3, "imcf", N, [](double) { return 2.0; }, ctl);
}

} // namespace

TEST_CASE("fit_decay recovers exact exponentials") {
    std::vector<double> t, y;
    for (int i = 0; i <= 40; ++i) {
        t.push_back(0.25 * i);
        y.push_back(3.0 * std::exp(-1.7 * 0.25 * i));
    }
    const auto fit = fit_decay(t, y, 0.0, 10.0);
    CHECK(rel(fit.rate, 1.7) < 1e-12);
    CHECK(fit.residual < 1e-12);
    CHECK(fit.t1 == 0.0);
    CHECK(fit.t2 == 10.0);

    // window is honored: corrupt the early samples, fit the tail
    auto yc = y;
    for (int i = 0; i < 16; ++i) yc[i] = 7.0 + i;
    const auto tail = fit_decay(t, yc, 4.0, 10.0);
    CHECK(rel(tail.rate, 1.7) < 1e-12);

    // default window = [max(2, t0 + 0.4 (te - t0)), te], here [4, 10]
    const auto dflt = fit_decay(t, yc);
    CHECK(dflt.rate == tail.rate); // same subset, same arithmetic
    CHECK(dflt.t1 == 4.0);

    // floor drops nonpositive values; too few survivors is a FitError
    std::vector<double> dead(t.size(), 0.0);
    CHECK_THROWS_AS(fit_decay(t, dead, 0.0, 10.0), FitError);
    CHECK_THROWS_AS(fit_decay(t, y, 9.9, 9.95), FitError);
    std::vector<double> tt{1.0, 2.0};
    std::vector<double> vv{1.0, 0.5, 0.2};
    CHECK_THROWS_AS(fit_decay(tt, vv, 0.0, 10.0), PreconditionError);
}

TEST_CASE("volume growth on an expanding sphere") {
    const auto traj = sphere_run(6.0);
    const auto vg = volume_growth(traj);
    // imcf spheres grow area exactly like e^t = e^{(m+a) t / psi(m+a)}
    CHECK(rel(vg.fit.rate, 1.0) < 1e-6);
    CHECK(vg.bounded);
    CHECK(vg.v_ratio < 1.0 + 1e-7);
    CHECK(vg.v_ratio >= 1.0);
}

TEST_CASE("second fundamental form convergence rates") {
    StepControl ctl;
    ctl.t_end = 8.0;
    const auto traj =
        run_case(Field::R, 3, "imcf", 96,
                 [](double t) { return 2.0 + 0.2 * std::cos(2.0 * t); }, ctl);
    const auto rep = second_ff_convergence(traj);
    // horizontal (kappa - 1)^2 and |A - (H/m) id|^2 decay at 4/psi(m+a) = 2
    CHECK(rel(rep.horizontal_sq.rate, 2.0) < 0.3);
    REQUIRE(rep.traceless_sq.has_value());
    CHECK(rel(rep.traceless_sq->rate, 2.0) < 0.3);
    CHECK_FALSE(rep.vertical_abs.has_value());

    StepControl ctlc;
    ctlc.t_end = 8.0;
    const auto trajc =
        run_case(Field::C, 2, "imcf", 96,
                 [](double t) { return 2.0 + 0.15 * std::cos(4.0 * t); }, ctlc);
    const auto repc = second_ff_convergence(trajc);
    const double psi_ma = 4.0; // imcf, m + a = 4
    CHECK(rel(repc.horizontal_sq.rate, 4.0 / psi_ma) < 0.3);
    REQUIRE(repc.vertical_abs.has_value());
    // the vertical deviation is not squared; it relaxes at 2/psi(m+a)
    CHECK(rel(repc.vertical_abs->rate, 2.0 / psi_ma) < 0.2);
    CHECK_FALSE(repc.traceless_sq.has_value());
}

TEST_CASE("masses vanish identically on geodesic spheres") {
    const auto r3 = make_ambient(Field::R, 3);
    const auto h2 = make_ambient(Field::H, 2);
    const auto sl_r =
        geometry_slice(make_profile(r3, 128, [](double) { return 1.9; }));
    const auto sl_h =
        geometry_slice(make_profile(h2, 128, [](double) { return 1.9; }));

    // bitwise zero: k_rad == k_tan and H == hbar exactly on constant data
    CHECK(hawking_mass(sl_r) == 0.0);
    CHECK(by_mass(sl_r) == 0.0);
    CHECK(by_mass(sl_h) == 0.0);
    CHECK_THROWS_AS(hawking_mass(sl_h), PreconditionError);
}

TEST_CASE("hawking mass limit against oracle and frozen anchors") {
    const auto r3 = make_ambient(Field::R, 3);
    const int N = 513;

    const auto f03 = sample_family(oracle::legendre2(0.3), r3, N);
    const auto f05 = sample_family(oracle::legendre2(0.5), r3, N);
    CHECK(rel(hawking_mass_limit(r3, f03), oracle::frozen::hml_p2_03) < 1e-7);
    CHECK(rel(hawking_mass_limit(r3, f05), oracle::frozen::hml_p2_05) < 1e-7);

    // an unrelated analytic family, cross-checked against the brute route
    const auto fam = oracle::affine_exp(0.25);
    const auto fa = sample_family(fam, r3, N);
    CHECK(rel(hawking_mass_limit(r3, fa),
              oracle::hawking_mass_limit_brute(r3, fam)) < 1e-7);

    // grid convergence: errors fall roughly like h^4
    const auto coarse = sample_family(oracle::legendre2(0.3), r3, 257);
    const double e_c =
        std::abs(hawking_mass_limit(r3, coarse) - oracle::frozen::hml_p2_03);
    const double e_f =
        std::abs(hawking_mass_limit(r3, f03) - oracle::frozen::hml_p2_03);
    CHECK(e_c / e_f > 8.0);

    CHECK_THROWS_AS(hawking_mass_limit(make_ambient(Field::C, 2), f03),
                    PreconditionError);
}

TEST_CASE("BY mass limit against oracle and frozen anchors") {
    const auto c2 = make_ambient(Field::C, 2);
    const auto h2 = make_ambient(Field::H, 2);
    const int N = 513;

    CHECK(rel(by_mass_limit(c2, sample_family(oracle::cos2theta(0.2), c2, N)),
              oracle::frozen::byl_c_020) < 1e-7);
    CHECK(rel(by_mass_limit(c2, sample_family(oracle::cos2theta(0.3), c2, N)),
              oracle::frozen::byl_c_030) < 1e-7);
    CHECK(rel(by_mass_limit(h2, sample_family(oracle::cos2theta(0.15), h2, N)),
              oracle::frozen::byl_h_015) < 1e-7);
    CHECK(rel(by_mass_limit(h2, sample_family(oracle::cos2theta(0.25), h2, N)),
              oracle::frozen::byl_h_025) < 1e-7);

    // small-amplitude Taylor law Q ~ (16 pi / 3 sqrt 2) eps^2
    const double q = by_mass_limit(c2, sample_family(oracle::cos2theta(0.01), c2, N));
    CHECK(rel(q, oracle::frozen::byl_c_001) < 1e-7);
    CHECK(std::abs(q / (oracle::frozen::byl_c_taylor * 1e-4) - 1.0) < 2e-4);

    // K = R has k = m + a = 2: the limit functional degenerates to
    // -int Delta_sigma f dsigma = 0 for every f
    const auto r3 = make_ambient(Field::R, 3);
    CHECK(std::abs(by_mass_limit(r3, sample_family(oracle::legendre2(0.3), r3, N))) <
          1e-7);
}

TEST_CASE("attach_mass_series and the monotonicity-defect bound") {
    auto traj = sphere_run(4.0);
    CHECK_THROWS_AS(mass_bound_check(traj), PreconditionError); // not attached
    attach_mass_series(traj);
    for (const auto& s : traj.samples) {
        REQUIRE(s.mass.has_value());
        CHECK(*s.mass == 0.0); // hawking mass of a sphere, bitwise
    }
    const auto rep = mass_bound_check(traj);
    CHECK(rep.rate == 2.0 / traj.psi_ma);
    CHECK(rep.c_fit == 0.0);
    CHECK(rep.min_margin >= -1e-15);
    CHECK(rep.compliant);
    CHECK_FALSE(rep.neg_fit.has_value());
}

TEST_CASE("BY mass evolution residual is small on resolved runs") {
    StepControl ctl;
    ctl.t_end = 0.02;
    ctl.out_dt = 2e-3;
    ctl.dt_max = 5e-4;
    const auto traj =
        run_case(Field::C, 2, "imcf", 128,
                 [](double t) { return 2.0 + 0.25 * std::cos(4.0 * t); }, ctl);
    REQUIRE(traj.samples.size() >= 4);
    const auto speed = make_speed("imcf");
    for (std::size_t i = 0; i + 1 < std::min<std::size_t>(traj.samples.size(), 5);
         ++i)
        CHECK(by_mass_evolution_residual(traj, i, speed) < 1e-4);
    CHECK_THROWS_AS(by_mass_evolution_residual(traj, traj.samples.size() - 1, speed),
                    PreconditionError);
}

TEST_CASE("H evolution residual vanishes on spheres to O(dt^2)") {
    StepControl ctl;
    ctl.t_end = 0.01;
    ctl.out_dt = 2e-3;
    ctl.dt_max = 5e-4;
    const auto traj = run_case(Field::R, 3, "imcf", 96,
                               [](double) { return 2.0; }, ctl);
    const auto speed = make_speed("imcf");
    REQUIRE(traj.samples.size() >= 3);
    for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i)
        CHECK(evolution_residual_H(traj, i, speed) < 1e-6);
}

TEST_CASE("|A|^2 + Ric(nu,nu): sphere identity and K = R cross-check") {
    // spheres: the display collapses to m/sinh^2 - a/cosh^2
    for (auto [field, n] : {std::pair{Field::R, 3}, {Field::C, 2}, {Field::H, 2}}) {
        const auto amb = make_ambient(field, n);
        const auto sl =
            geometry_slice(make_profile(amb, 96, [](double) { return 1.4; }));
        const auto a2r = a2_plus_ricci(sl);
        for (int j = 0; j < sl.nodes; ++j) {
            const double want =
                amb.m / (sl.sinh_rho[j] * sl.sinh_rho[j]) -
                amb.a / (sl.cosh_rho[j] * sl.cosh_rho[j]);
            CHECK(rel(a2r[j], want) < 1e-15);
        }
    }

    // K = R: the display equals the diagonal algebra k_r^2 + q k_t^2 - m
    const auto r4 = make_ambient(Field::R, 4);
    const auto sl = geometry_slice(make_profile(
        r4, 257, [](double t) { return 1.8 + 0.3 * std::cos(2.0 * t); }));
    const auto a2r = a2_plus_ricci(sl);
    for (int j = 0; j < sl.nodes; ++j) {
        const double want = sl.k_rad[j] * sl.k_rad[j] +
                            sl.q * sl.k_tan[j] * sl.k_tan[j] - r4.m;
        CHECK(rel(a2r[j], want) < 1e-10);
    }

    // K != R: grid-refinement consistency of the O'Neill terms
    const auto h2 = make_ambient(Field::H, 2);
    auto slice_at_n = [&](int N) {
        return geometry_slice(make_profile(
            h2, N, [](double t) { return 1.8 + 0.2 * std::cos(4.0 * t); }));
    };
    const auto a_c = a2_plus_ricci(slice_at_n(257));
    const auto a_f = a2_plus_ricci(slice_at_n(513));
    double worst = 0.0;
    for (int j = 0; j < 257; ++j)
        worst = std::max(worst, std::abs(a_c[j] - a_f[2 * j]));
    CHECK(worst < 1e-7);
}

TEST_CASE("graph Laplacian against analytic values") {
    const auto r3 = make_ambient(Field::R, 3);
    const int N = 513;
    const double rho0 = 1.3;
    const auto sl = geometry_slice(make_profile(r3, N, [=](double) { return rho0; }));
    std::vector<double> u(N);
    for (int j = 0; j < N; ++j) u[j] = std::cos(3.0 * sl.theta[j]);
    const auto lap = laplacian_graph(sl, u);
    const double sh2 = std::sinh(rho0) * std::sinh(rho0);
    for (int j = 0; j < N; ++j) {
        const double th = sl.theta[j];
        double invariant; // u'' + cot(theta) u'
        if (j == 0 || j == N - 1)
            invariant = 2.0 * (-9.0) * std::cos(3.0 * th);
        else
            invariant = -9.0 * std::cos(3.0 * th) -
                        3.0 * std::sin(3.0 * th) * std::cos(th) / std::sin(th);
        CHECK(std::abs(lap[j] - invariant / sh2) < 1e-6);
    }

    // graph case: grid-refinement consistency
    const auto h2 = make_ambient(Field::H, 2);
    auto lap_at = [&](int n) {
        const auto s = geometry_slice(make_profile(
            h2, n, [](double t) { return 2.0 + 0.2 * std::cos(4.0 * t); }));
        std::vector<double> uu(n);
        for (int j = 0; j < n; ++j) uu[j] = std::cos(2.0 * s.theta[j]);
        return laplacian_graph(s, uu);
    };
    const auto lc = lap_at(257), lf = lap_at(513);
    double worst = 0.0;
    for (int j = 0; j < 257; ++j)
        worst = std::max(worst, std::abs(lc[j] - lf[2 * j]));
    CHECK(worst < 1e-7);

    std::vector<double> wrong(5, 0.0);
    CHECK_THROWS_AS(laplacian_graph(sl, wrong), PreconditionError);
}

TEST_CASE("rescaled limit of a long sphere run") {
    const auto traj = sphere_run(10.0);
    const auto lim = rescaled_limit(traj);
    REQUIRE(lim.f.size() == traj.samples.back().rho.size());
    for (double fj : lim.f) CHECK(std::abs(fj) < 1e-8);
    CHECK(lim.cauchy < 1e-8);
    CHECK(rel(sphere_area(traj.amb, lim.rho_tilde), traj.samples.back().area) <
          1e-10);

    const auto shorty = sphere_run(2.0);
    CHECK_THROWS_AS(rescaled_limit(shorty), PreconditionError); // 2 < 8/psi(2)
}

TEST_CASE("yamabe classification") {
    const auto r3 = make_ambient(Field::R, 3);
    const auto c2 = make_ambient(Field::C, 2);
    const int N = 513;
    const auto gr = angular_grid(r3, N);
    const auto gc = angular_grid(c2, N);

    // affine e^{-f}: exact conformal round factor
    std::vector<double> f_affine(N), f_const(N, 0.4), f_cos(N);
    for (int j = 0; j < N; ++j) {
        f_affine[j] = -std::log(2.0 + 0.5 * std::cos(gr.theta[j]));
        f_cos[j] = 0.3 * std::cos(gr.theta[j]);
    }
    auto rep = yamabe_classify(r3, f_affine);
    CHECK(rep.verdict == Verdict::Constant);
    CHECK(rep.residual < 1e-10);

    rep = yamabe_classify(r3, f_const);
    CHECK(rep.verdict == Verdict::Constant);

    rep = yamabe_classify(r3, f_cos);
    CHECK(rep.verdict == Verdict::NonConstant);
    CHECK(rel(rep.residual, oracle::frozen::yamabe_res_03) < 1e-6);

    // K != R: only constants are round; the residual is the relative rms
    std::vector<double> g_const(N, -0.2), g_dev(N), g_tiny(N);
    for (int j = 0; j < N; ++j) {
        g_dev[j] = 0.05 * std::cos(2.0 * gc.theta[j]);
        g_tiny[j] = 1e-6 * std::cos(2.0 * gc.theta[j]);
    }
    CHECK(yamabe_classify(c2, g_const).verdict == Verdict::Constant);
    rep = yamabe_classify(c2, g_dev);
    CHECK(rep.verdict == Verdict::NonConstant);
    CHECK(rel(rep.residual, 0.05 / std::sqrt(3.0)) < 1e-3);
    CHECK(yamabe_classify(c2, g_tiny).verdict == Verdict::Indeterminate);
}
