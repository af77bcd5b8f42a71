#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wavekin/dispersion.hpp"
#include "wavekin/field.hpp"
#include "wavekin/grid.hpp"
#include "wavekin/vec3.hpp"

namespace wavekin {

// Every kinematic quantity of one field + dispersion pair at one time.
// The split pairs satisfy L_ext + L_int = L_total by construction, and
// N_boost = t * p_mean * c - r_energy * E_mean / c definitionally.
struct KinematicState {
    double t = 0.0;
    double norm = 0.0;
    Vec3 p_mean;
    double E_mean = 0.0;
    Vec3 r_prob;
    Vec3 r_energy;
    Vec3 v_group;
    Vec3 v_energy;
    Vec3 L_total;
    Vec3 N_boost;
    Vec3 L_ext_prob, L_int_prob;
    Vec3 L_ext_energy, L_int_energy;
};

enum class CentroidKind { Probability, Energy };

struct ScalarMoments {
    double norm = 0.0;
    Vec3 p_mean;
    double E_mean = 0.0;
};

// norm = integral |psi|^2, p_mean = <k>, E_mean = <omega>; t-independent.
ScalarMoments scalar_moments(const SpectralField& field, const DispersionRelation& disp,
                             const GridSpec& spec, int threads = 0);

// <r>(t) = Re[ integral psi*(t) i grad_k psi(t) ] / norm. The unnormalized
// integral's imaginary part must stay below 1e-8 * norm or the grid is judged
// inconsistent (NumericalConsistencyError).
Vec3 probability_centroid(const SpectralField& field, const DispersionRelation& disp,
                          const GridSpec& spec, double t, int threads = 0);

// <grad_k omega>; equals the slope of probability_centroid in t.
Vec3 mean_group_velocity(const SpectralField& field, const DispersionRelation& disp,
                         const GridSpec& spec, int threads = 0);

// <r_E>(t) = Re[ integral psi*(t) omega i grad_k psi(t) ] / (norm * E_mean).
// The real part is the symmetrized (Hermitian) evaluation; the imaginary part
// analytically equals -(1/2) <grad omega> * norm and is checked with a logged
// warning, never an error.
Vec3 energy_centroid(const SpectralField& field, const DispersionRelation& disp,
                     const GridSpec& spec, double t, int threads = 0);

// <omega grad omega> / <omega>; for relativistic kinds this equals
// c^2 p_mean / E_mean because omega grad omega = c^2 k pointwise.
Vec3 energy_centroid_velocity(const SpectralField& field, const DispersionRelation& disp,
                              const GridSpec& spec, int threads = 0);

// t * p_mean * c - r_energy(t) * E_mean / c; conserved exactly when the
// dispersion is relativistic, generically drifting otherwise.
Vec3 boost_momentum(const SpectralField& field, const DispersionRelation& disp,
                    const GridSpec& spec, double t, int threads = 0);

// <L> = Re[ integral psi*(t) (-i)(k x grad_k) psi(t) ] / norm; t-independent
// for isotropic dispersion since k x grad omega vanishes identically.
Vec3 orbital_angular_momentum(const SpectralField& field, const DispersionRelation& disp,
                              const GridSpec& spec, double t, int threads = 0);

// L_ext = r_centroid(t) x p_mean for the chosen centroid; L_int is the rest.
std::pair<Vec3, Vec3> decompose_angular_momentum(const SpectralField& field,
                                                 const DispersionRelation& disp,
                                                 const GridSpec& spec, double t,
                                                 CentroidKind kind, int threads = 0);

// One grid pass producing a consistent snapshot; internal identities
// (splits, boost definition, subluminality for relativistic kinds) are
// asserted before returning.
KinematicState kinematic_state(const SpectralField& field, const DispersionRelation& disp,
                               const GridSpec& spec, double t, int threads = 0);

std::vector<KinematicState> trajectory(const SpectralField& field, const DispersionRelation& disp,
                                       const GridSpec& spec, double t0, double t1, int steps,
                                       int threads = 0);

// --- grid-refinement convergence ------------------------------------------

using ObservableValue = std::variant<double, Vec3>;

struct ConvergenceReport {
    ObservableValue value;
    double error_estimate = 0.0; // max-norm difference of the two finest levels
    std::vector<std::pair<GridSpec, ObservableValue>> levels;
    bool converged = false;
};

// Names accepted by converge(): norm, p_mean, E_mean, r_prob, r_energy,
// v_group, v_energy, L_total, N_boost.
const std::vector<std::string>& observable_names();

struct ConvergeOptions {
    int initial_points = 33;
    double margin = 6.0;
    int max_points = 257; // per-axis cap
    int threads = 0;
};

// Evaluates the named observable on node-nested grids (N, 2N-1, 4N-3, ...)
// until two successive levels agree within tol in max-norm, or the cap is
// reached (reported via the converged flag, not an exception). Needs an
// analytic field: sampled grids cannot be refined.
ConvergenceReport converge(const SpectralField& field, const DispersionRelation& disp,
                           const std::string& observable, double t, double tol,
                           const ConvergeOptions& opts = {});

} // namespace wavekin
