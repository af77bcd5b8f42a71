#pragma once

#include <functional>
#include <vector>

#include "wavekin/dispersion.hpp"
#include "wavekin/field.hpp"
#include "wavekin/vec3.hpp"

namespace wavekin {

// Closed-form expectation values for superpositions of well-separated narrow
// packets: cross terms are neglected and each packet contributes its center
// value with weight |A_j|^2. The independent analytic cross-check for the
// grid quadrature.
struct SeparatedPacketSummary {
    std::vector<double> weights;     // |A_j|^2
    std::vector<Vec3> centers;       // k_j
    std::vector<double> frequencies; // omega(|k_j|)

    // min over pairs of |k_i - k_j| / max(width_i, width_j); +inf for one packet
    double min_separation_ratio = 0.0;
    // min over j of |k_j| / width_j
    double min_center_ratio = 0.0;

    static SeparatedPacketSummary from_field(const SpectralField& field,
                                             const DispersionRelation& disp);

    // Both separation metrics must clear 5 for the neglected overlap terms to
    // fall below ~2e-3.
    bool trusted() const { return min_separation_ratio > 5.0 && min_center_ratio > 5.0; }
};

// A value plus the flag saying whether the separation preconditions held.
template <class T>
struct Approximation {
    T value{};
    bool trusted = false;
};

Approximation<double> separated_expectation(const SeparatedPacketSummary& summary,
                                            const std::function<double(const Vec3&)>& Q);
Approximation<Vec3> separated_expectation(const SeparatedPacketSummary& summary,
                                          const std::function<Vec3(const Vec3&)>& Q);

struct PacketVelocities {
    Vec3 v_prob;   // sum w_j v_g(k_j) / sum w_j
    Vec3 v_energy; // sum w_j omega_j v_g(k_j) / sum w_j omega_j
    bool trusted = false;
};

// For relativistic kinds omega * grad omega = c^2 k pointwise, so v_energy
// reduces to c^2 (sum w k) / (sum w omega) exactly.
PacketVelocities packet_velocities(const SeparatedPacketSummary& summary,
                                   const DispersionRelation& disp);

} // namespace wavekin
