#pragma once

#include <map>
#include <string>
#include <vector>

#include "hypflow/ambient.hpp"
#include "hypflow/flow.hpp"

namespace hypflow {

// ============================================================================
// Flat `key = value` configuration with dotted keys.  Lines starting with '#'
// and blank lines are ignored.  Unknown keys are a ConfigError (catches
// typos), as are missing mandatory keys and out-of-range values.
// ============================================================================

struct InitialData {
    std::string family = "constant"; // constant | cosk | legendre
    double tau = 2.0;                // base radius
    double eps = 0.0;                // perturbation amplitude
    int mode = 2;                    // wavenumber k resp. Legendre degree l
};

struct DiagnosticsToggles {
    bool rates = true;
    bool masses = true;
    bool limit = true;
    bool residuals = true;
};

struct SweepLists {
    std::vector<std::string> speeds; // '|'-separated in the file
    std::vector<double> taus;
    std::vector<double> eps;
    int max_runs = 64;
};

struct RunConfig {
    Field field = Field::R;
    int n = 3;
    std::string speed = "imcf";
    InitialData init;
    int nodes = 512;
    StepControl control;
    std::string output_dir = ".";
    DiagnosticsToggles diag;
    SweepLists sweep;
};

// Key-value pairs in file order (duplicates: last one wins).
std::map<std::string, std::string> parse_kv_file(const std::string& path);

RunConfig config_from_kv(const std::map<std::string, std::string>& kv);
RunConfig load_config(const std::string& path);

// rho(theta) for the configured family; ConfigError for unknown families or
// parameters outside their valid ranges (tau > 0, eps small enough to keep
// rho positive, mode >= 0).
std::vector<double> initial_rho(const RunConfig& cfg,
                                const std::vector<double>& theta);

} // namespace hypflow
