#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hypflow/ambient.hpp"

namespace hypflow {

// One recorded output time of a flow run.  The per-slice diagnostics are
// computed at recording time; mass is attached afterwards by the diagnostics
// layer (it depends on the field-specific quasi-local mass choice).
struct TrajectorySample {
    double t = 0.0;
    double dt = 0.0; // step size in effect when the sample was taken
    std::vector<double> rho;

    double area = 0.0;
    double v_norm = 0.0;        // area * exp(-(m+a) t / psi(m+a))
    double sup_grad_sq = 0.0;   // max_j |grad phi|^2
    double sup_h_dev = 0.0;     // max_j |H - (m+a)|
    double min_h = 0.0;
    double max_pc = 0.0;        // max over principal curvatures and nodes
    double norm_d2phi = 0.0;    // max_j |phi''|
    double norm_d3phi = 0.0;    // max_j |phi'''|
    double rho_min = 0.0;
    double rho_max = 0.0;
    std::optional<double> mass; // attached by diagnostics::attach_mass_series
};

struct Trajectory {
    AmbientSpace amb;
    std::string speed_label;
    double psi_ma = 0.0; // psi(m + a), the universal rate scale
    std::vector<double> theta;
    std::vector<TrajectorySample> samples;
};

} // namespace hypflow
