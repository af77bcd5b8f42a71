#pragma once

#include "wavekin/approx.hpp"
#include "wavekin/dispersion.hpp"
#include "wavekin/field.hpp"
#include "wavekin/observables.hpp"

namespace wavekin {

// Built-in two-packet massless example: amplitudes 0.5 and 0.87, centers
// (0.3, 0.5, 0) and (1.2, 0.7, 0), widths 0.1 and 0.15, c = 1. The literal
// amplitudes give total weight 1.0069; all reported quantities are ratios, so
// they are well-defined without renormalizing. The renormalize switch drops
// the second weight to 0.75 for sensitivity comparison.
SpectralField model_example_field(bool renormalize = false);
DispersionRelation model_example_dispersion();

struct ModelExampleOptions {
    int points = 96;     // initial per-axis resolution of the refinement ladder
    double margin = 6.0; // box margin in packet widths
    double tol = 1e-8;   // max-norm convergence tolerance on each velocity
    int max_points = 257;
    bool renormalize = false;
    int threads = 0;
};

struct ModelExampleReport {
    // closed-form separated-packet route
    Vec3 p_approx;
    double E_approx = 0.0;
    Vec3 v_prob_approx, v_energy_approx;
    double angle_approx_deg = 0.0;
    double weight_sum = 0.0;
    bool renormalized = false;

    // grid-quadrature route (converged)
    double norm_quad = 0.0;
    Vec3 p_quad;
    double E_quad = 0.0;
    Vec3 v_prob_quad, v_energy_quad;
    double angle_quad_deg = 0.0;
    int final_points = 0;
    bool converged = false;
    ConvergenceReport v_prob_convergence, v_energy_convergence;

    // route comparison
    double rel_disagreement_v_prob = 0.0;
    double rel_disagreement_v_energy = 0.0;
    bool disagreement_flag = false; // either route pair differs by more than 2%
    double speed_reference = 1.0;   // |v|/c = 1 circle for plots
};

double angle_deg(const Vec3& a, const Vec3& b);

// Runs both routes and compares them. Non-convergence of the quadrature route
// is reported in the flags, not thrown.
ModelExampleReport model_example_report(const ModelExampleOptions& opts = {});

} // namespace wavekin
