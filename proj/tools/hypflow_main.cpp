#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "hypflow/config.hpp"
#include "hypflow/errors.hpp"
#include "hypflow/runner.hpp"

namespace {

// Exit codes: 0 ok, 1 verification failure, 2 usage/config, 3 numerics.
int classify(const std::exception& e) {
    if (dynamic_cast<const hypflow::VerificationError*>(&e)) return 1;
    if (dynamic_cast<const hypflow::FlowBreakdownError*>(&e)) return 3;
    if (dynamic_cast<const hypflow::NumericBlowupError*>(&e)) return 3;
    if (dynamic_cast<const hypflow::StabilityError*>(&e)) return 3;
    return 2;
}

int do_validate_speed(const std::string& spec) {
    const hypflow::SpeedFunction speed = hypflow::make_speed(spec);
    const hypflow::ValidationReport rep = hypflow::validate_speed(speed);

    const char* conds[] = {"i", "ii", "iii"};
    for (const char* c : conds) {
        bool bad = false;
        for (const auto& v : rep.violations)
            if (v.condition == c) bad = true;
        std::printf("condition %s: %s\n", c, bad ? "FAIL" : "pass");
    }
    for (std::size_t i = 0; i < rep.violations.size() && i < 6; ++i) {
        const auto& v = rep.violations[i];
        std::printf("  violation: condition %s at x = %.6g (margin %.6g)\n",
                    v.condition.c_str(), v.x, v.lhs);
    }
    std::printf("speed '%s': %s\n", speed.label.c_str(),
                rep.passed ? "admissible" : "REJECTED");
    return rep.passed ? 0 : 1;
}

int do_run(const std::string& config_path) {
    const hypflow::RunConfig cfg = hypflow::load_config(config_path);
    const hypflow::RunArtifacts art = hypflow::execute_run(cfg);
    hypflow::write_run_artifacts(art, cfg.output_dir);
    std::printf("%s", hypflow::summary_text(art).c_str());
    std::printf("wrote %s/series.csv\n", cfg.output_dir.c_str());
    return 0;
}

int do_sweep(const std::string& config_path) {
    const hypflow::RunConfig cfg = hypflow::load_config(config_path);
    hypflow::execute_sweep(cfg, cfg.output_dir);
    std::printf("wrote %s/aggregate.csv\n", cfg.output_dir.c_str());
    return 0;
}

int do_compare_ode(const std::string& config_path) {
    const hypflow::RunConfig cfg = hypflow::load_config(config_path);
    const double dev = hypflow::compare_ode(cfg);
    std::printf("max relative deviation |rho_PDE - rho_ODE| = %.6e\n", dev);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"expanding curvature flows of star-shaped hypersurfaces in "
                 "rank-one hyperbolic spaces"};
    app.require_subcommand(1);

    std::string speed_spec, config_path;

    CLI::App* vs = app.add_subcommand("validate-speed",
                                      "check the admissibility conditions "
                                      "(i)-(iii) of a speed function");
    vs->add_option("speed", speed_spec,
                   "imcf | power:p | log1p | powersum:c1,p1;c2,p2;...")
        ->required();

    CLI::App* run = app.add_subcommand("run", "integrate a configured flow");
    run->add_option("config", config_path, "key = value config file")
        ->required();

    CLI::App* sweep =
        app.add_subcommand("sweep", "run a cross-product parameter sweep");
    sweep->add_option("config", config_path, "config with sweep.* lists")
        ->required();

    CLI::App* cmp = app.add_subcommand(
        "compare-ode", "compare a geodesic-sphere run with the exact ODE");
    cmp->add_option("config", config_path, "config with constant data")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (vs->parsed()) return do_validate_speed(speed_spec);
        if (run->parsed()) return do_run(config_path);
        if (sweep->parsed()) return do_sweep(config_path);
        if (cmp->parsed()) return do_compare_ode(config_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return classify(e);
    }
    return 2;
}
