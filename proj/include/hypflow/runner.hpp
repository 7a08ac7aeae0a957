#pragma once

#include <string>
#include <vector>

#include "hypflow/config.hpp"
#include "hypflow/diagnostics.hpp"
#include "hypflow/trajectory.hpp"

namespace hypflow {

// ============================================================================
// Orchestration shared by the CLI subcommands: execute a configured run,
// write its CSV/summary artifacts, and drive sweeps.
// ============================================================================

struct RunArtifacts {
    Trajectory traj;
    std::vector<std::pair<std::string, std::string>> summary; // ordered k/v
};

// Builds the initial profile from cfg, refuses inadmissible speeds and
// non-mean-convex data (VerificationError before stepping), runs the flow,
// attaches masses and computes the toggled diagnostics.  Disabled
// diagnostics appear in the summary as "not-computed".
RunArtifacts execute_run(const RunConfig& cfg);

// CSV schema (header written verbatim):
//   t,area,V_norm,sup_grad_phi_sq,sup_H_dev,min_H,max_pc,norm_d2phi,
//   norm_d3phi,mass,rho_min,rho_max,dt
// All numbers use round-trip formatting, so identical configs give
// byte-identical files.
std::string trajectory_csv(const Trajectory& traj);

std::string summary_text(const RunArtifacts& artifacts);

// Writes <dir>/series.csv and <dir>/summary.txt, creating dir if needed.
void write_run_artifacts(const RunArtifacts& artifacts, const std::string& dir);

// Cross-product sweep over cfg.sweep lists (empty lists: ConfigError; more
// than cfg.sweep.max_runs combinations: ConfigError).  Each combination runs
// in its own subdirectory run_<idx>; the aggregate table
// (<dir>/aggregate.csv) has one row per combination with fitted rates,
// final mass and the Yamabe verdict.  Concurrency is capped by
// HYPFLOW_THREADS (default: hardware concurrency).
void execute_sweep(const RunConfig& base, const std::string& dir);

// Max relative deviation |rho_PDE - rho_ODE| / rho_ODE over the run.
// Refuses non-constant initial data (ConfigError).
double compare_ode(const RunConfig& cfg);

} // namespace hypflow
