#include "hypflow/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "hypflow/errors.hpp"
#include "hypflow/flow.hpp"

namespace hypflow {

namespace {

std::string fmt(double x, const char* spec = "%.12g") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

constexpr const char* kNotComputed = "not-computed";

void add_rate_fields(std::vector<std::pair<std::string, std::string>>& s,
                     const std::string& prefix, const RateFit& f) {
    s.emplace_back(prefix, fmt(f.rate));
    s.emplace_back(prefix + "_window", fmt(f.t1) + ".." + fmt(f.t2));
    s.emplace_back(prefix + "_residual", fmt(f.residual));
}

} // namespace

RunArtifacts execute_run(const RunConfig& cfg) {
    const AmbientSpace amb = make_ambient(cfg.field, cfg.n);
    const SpeedFunction speed = make_speed(cfg.speed);
    const ValidationReport vr = validate_speed(speed);
    if (!vr.passed)
        throw VerificationError("speed '" + speed.label +
                                "' violates admissibility condition " +
                                vr.violations.front().condition);

    const AngularGrid ag = angular_grid(amb, cfg.nodes);
    RadialProfile prof = make_profile(amb, initial_rho(cfg, ag.theta));
    FlowState st = make_state(prof);
    for (int j = 0; j < st.slice.nodes; ++j)
        if (!(st.slice.H[j] > 0.0))
            throw VerificationError(
                "initial datum is not mean convex: H(0) <= 0 at node " +
                std::to_string(j));

    RunArtifacts art;
    art.traj = run(st, speed, cfg.control);
    attach_mass_series(art.traj);
    const Trajectory& traj = art.traj;

    auto& s = art.summary;
    s.emplace_back("ambient.field", field_name(amb.field));
    s.emplace_back("ambient.n", std::to_string(amb.n));
    s.emplace_back("ambient.m", std::to_string(amb.m));
    s.emplace_back("ambient.a", std::to_string(amb.a));
    s.emplace_back("speed", speed.label);
    s.emplace_back("psi_ma", fmt(traj.psi_ma));
    s.emplace_back("grid.nodes", std::to_string(cfg.nodes));
    s.emplace_back("samples", std::to_string(traj.samples.size()));
    s.emplace_back("t_end", fmt(traj.samples.back().t));
    s.emplace_back("area.final", fmt(traj.samples.back().area, "%.17g"));
    s.emplace_back("mass.final",
                   fmt(traj.samples.back().mass.value(), "%.17g"));

    std::vector<double> t, grad, hdev;
    for (const auto& smp : traj.samples) {
        t.push_back(smp.t);
        grad.push_back(smp.sup_grad_sq);
        hdev.push_back(smp.sup_h_dev);
    }

    if (cfg.diag.rates) {
        s.emplace_back("rates.target", fmt(2.0 / traj.psi_ma));
        try {
            add_rate_fields(s, "rates.grad_sq", fit_decay(t, grad));
        } catch (const FitError&) {
            s.emplace_back("rates.grad_sq", kNotComputed);
        }
        try {
            add_rate_fields(s, "rates.h_dev", fit_decay(t, hdev));
        } catch (const FitError&) {
            s.emplace_back("rates.h_dev", kNotComputed);
        }
        try {
            const VolumeGrowth vg = volume_growth(traj);
            s.emplace_back("volume.rate", fmt(vg.fit.rate));
            s.emplace_back("volume.rate_target",
                           fmt((amb.m + amb.a) / traj.psi_ma));
            s.emplace_back("volume.v_ratio", fmt(vg.v_ratio));
            s.emplace_back("volume.bounded", vg.bounded ? "true" : "false");
        } catch (const FitError&) {
            s.emplace_back("volume.rate", kNotComputed);
        }
        try {
            const SecondFFReport ff = second_ff_convergence(traj);
            add_rate_fields(s, "rates.2ff_horizontal_sq", ff.horizontal_sq);
            if (ff.traceless_sq)
                add_rate_fields(s, "rates.2ff_traceless_sq", *ff.traceless_sq);
            if (ff.vertical_abs)
                add_rate_fields(s, "rates.2ff_vertical", *ff.vertical_abs);
        } catch (const FitError&) {
            s.emplace_back("rates.2ff_horizontal_sq", kNotComputed);
        }
    } else {
        s.emplace_back("rates.grad_sq", kNotComputed);
        s.emplace_back("rates.h_dev", kNotComputed);
        s.emplace_back("volume.rate", kNotComputed);
        s.emplace_back("rates.2ff_horizontal_sq", kNotComputed);
    }

    if (cfg.diag.masses) {
        const MassBoundReport mb = mass_bound_check(traj);
        s.emplace_back("mass.bound_rate", fmt(mb.rate));
        s.emplace_back("mass.bound_c", fmt(mb.c_fit));
        s.emplace_back("mass.bound_margin", fmt(mb.min_margin));
        s.emplace_back("mass.bound_neg_rate",
                       mb.neg_fit ? fmt(mb.neg_fit->rate) : "none");
        s.emplace_back("mass.bound_compliant", mb.compliant ? "true" : "false");
    } else {
        s.emplace_back("mass.bound_compliant", kNotComputed);
    }

    if (cfg.diag.limit) {
        try {
            const RescaledLimit lim = rescaled_limit(traj);
            s.emplace_back("limit.rho_tilde", fmt(lim.rho_tilde, "%.17g"));
            s.emplace_back("limit.cauchy", fmt(lim.cauchy));
            const YamabeReport y = yamabe_classify(amb, lim.f);
            const char* verdict = y.verdict == Verdict::Constant
                                      ? "constant-curvature"
                                      : y.verdict == Verdict::NonConstant
                                            ? "non-constant"
                                            : "indeterminate";
            s.emplace_back("limit.yamabe", verdict);
            s.emplace_back("limit.yamabe_residual", fmt(y.residual));
        } catch (const PreconditionError&) {
            s.emplace_back("limit.yamabe", kNotComputed);
        }
    } else {
        s.emplace_back("limit.yamabe", kNotComputed);
    }

    if (cfg.diag.residuals && traj.samples.size() >= 2) {
        std::size_t i = traj.samples.size() / 2;
        if (i + 1 >= traj.samples.size()) i = traj.samples.size() - 2;
        s.emplace_back("residuals.by_mass",
                       fmt(by_mass_evolution_residual(traj, i, speed)));
        s.emplace_back("residuals.h_sup",
                       fmt(evolution_residual_H(traj, i, speed)));
    } else {
        s.emplace_back("residuals.by_mass", kNotComputed);
        s.emplace_back("residuals.h_sup", kNotComputed);
    }
    return art;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out =
        "t,area,V_norm,sup_grad_phi_sq,sup_H_dev,min_H,max_pc,norm_d2phi,"
        "norm_d3phi,mass,rho_min,rho_max,dt\n";
    char buf[512];
    for (const auto& s : traj.samples) {
        std::snprintf(buf, sizeof buf,
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                      "%.17g,%.17g,%.17g,%.17g\n",
                      s.t, s.area, s.v_norm, s.sup_grad_sq, s.sup_h_dev,
                      s.min_h, s.max_pc, s.norm_d2phi, s.norm_d3phi,
                      s.mass ? *s.mass : std::nan(""), s.rho_min, s.rho_max,
                      s.dt);
        out += buf;
    }
    return out;
}

std::string summary_text(const RunArtifacts& artifacts) {
    std::string out;
    for (const auto& [k, v] : artifacts.summary) out += k + " = " + v + "\n";
    return out;
}

void write_run_artifacts(const RunArtifacts& artifacts,
                         const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream csv(dir + "/series.csv", std::ios::binary);
        if (!csv) throw ConfigError("cannot write to '" + dir + "'");
        csv << trajectory_csv(artifacts.traj);
    }
    std::ofstream sum(dir + "/summary.txt", std::ios::binary);
    if (!sum) throw ConfigError("cannot write to '" + dir + "'");
    sum << summary_text(artifacts);
}

namespace {

unsigned sweep_threads() {
    if (const char* env = std::getenv("HYPFLOW_THREADS")) {
        const int k = std::atoi(env);
        if (k >= 1) return static_cast<unsigned>(k);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

std::string summary_field(const RunArtifacts& art, const std::string& key) {
    for (const auto& [k, v] : art.summary)
        if (k == key) return v;
    return "n/a";
}

} // namespace

void execute_sweep(const RunConfig& base, const std::string& dir) {
    std::vector<std::string> speeds = base.sweep.speeds;
    std::vector<double> taus = base.sweep.taus;
    std::vector<double> eps = base.sweep.eps;
    if (speeds.empty() && taus.empty() && eps.empty())
        throw ConfigError("sweep: no parameter lists given");
    if (speeds.empty()) speeds.push_back(base.speed);
    if (taus.empty()) taus.push_back(base.init.tau);
    if (eps.empty()) eps.push_back(base.init.eps);

    struct Combo {
        std::string speed;
        double tau, eps;
    };
    std::vector<Combo> combos;
    for (const auto& sp : speeds)
        for (const double tau : taus)
            for (const double e : eps) combos.push_back({sp, tau, e});
    if (static_cast<int>(combos.size()) > base.sweep.max_runs)
        throw ConfigError("sweep: " + std::to_string(combos.size()) +
                          " combinations exceed sweep.max_runs = " +
                          std::to_string(base.sweep.max_runs));

    std::filesystem::create_directories(dir);
    std::vector<std::string> rows(combos.size());
    std::vector<std::exception_ptr> errors(combos.size());
    std::atomic<std::size_t> cursor{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= combos.size()) return;
            try {
                RunConfig cfg = base;
                cfg.speed = combos[i].speed;
                cfg.init.tau = combos[i].tau;
                cfg.init.eps = combos[i].eps;
                char sub[32];
                std::snprintf(sub, sizeof sub, "run_%03zu", i);
                cfg.output_dir = dir + "/" + sub;
                const RunArtifacts art = execute_run(cfg);
                write_run_artifacts(art, cfg.output_dir);
                char buf[512];
                std::snprintf(buf, sizeof buf, "%zu,%s,%.17g,%.17g,%s,%s,%s,%s,%s,%s\n",
                              i, combos[i].speed.c_str(), combos[i].tau,
                              combos[i].eps,
                              summary_field(art, "psi_ma").c_str(),
                              summary_field(art, "rates.grad_sq").c_str(),
                              summary_field(art, "rates.h_dev").c_str(),
                              summary_field(art, "volume.rate").c_str(),
                              summary_field(art, "mass.final").c_str(),
                              summary_field(art, "limit.yamabe").c_str());
                rows[i] = buf;
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const unsigned nt =
        std::min<unsigned>(sweep_threads(),
                           static_cast<unsigned>(combos.size()));
    std::vector<std::thread> pool;
    for (unsigned k = 0; k + 1 < nt; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::ofstream agg(dir + "/aggregate.csv", std::ios::binary);
    if (!agg) throw ConfigError("cannot write aggregate table");
    agg << "run,speed,tau,eps,psi_ma,rate_grad_sq,rate_h_dev,rate_volume,"
           "mass_final,yamabe\n";
    for (const auto& r : rows) agg << r;
}

double compare_ode(const RunConfig& cfg) {
    if (cfg.init.family != "constant" && cfg.init.eps != 0.0)
        throw ConfigError("compare-ode needs constant initial data");

    const AmbientSpace amb = make_ambient(cfg.field, cfg.n);
    const SpeedFunction speed = make_speed(cfg.speed);
    const ValidationReport vr = validate_speed(speed);
    if (!vr.passed)
        throw VerificationError("speed '" + speed.label +
                                "' violates admissibility condition " +
                                vr.violations.front().condition);

    RadialProfile prof = make_profile(
        amb, cfg.nodes, [&](double) { return cfg.init.tau; });
    const Trajectory traj = run(make_state(prof), speed, cfg.control);

    std::vector<double> times;
    for (const auto& s : traj.samples) times.push_back(s.t);
    const std::vector<double> ode =
        geodesic_sphere_ode(cfg.init.tau, speed, amb, times);

    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double pde = traj.samples[i].rho.front();
        worst = std::max(worst, std::fabs(pde - ode[i]) / ode[i]);
    }
    return worst;
}

} // namespace hypflow
