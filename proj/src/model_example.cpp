#include "wavekin/model_example.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wavekin/quadrature.hpp"

namespace wavekin {

SpectralField model_example_field(bool renormalize) {
    const double a2 = renormalize ? std::sqrt(0.75) : 0.87;
    return SpectralField::gaussians({
        {Complex(0.5, 0.0), {0.3, 0.5, 0.0}, 0.1, {0.0, 0.0, 0.0}},
        {Complex(a2, 0.0), {1.2, 0.7, 0.0}, 0.15, {0.0, 0.0, 0.0}},
    });
}

DispersionRelation model_example_dispersion() { return DispersionRelation::massless(1.0); }

double angle_deg(const Vec3& a, const Vec3& b) {
    const double denom = a.norm() * b.norm();
    const double cosv = std::clamp(dot(a, b) / denom, -1.0, 1.0);
    return std::acos(cosv) * 180.0 / std::numbers::pi;
}

ModelExampleReport model_example_report(const ModelExampleOptions& opts) {
    const SpectralField field = model_example_field(opts.renormalize);
    const DispersionRelation disp = model_example_dispersion();

    ModelExampleReport rep;
    rep.renormalized = opts.renormalize;

    const auto summary = SeparatedPacketSummary::from_field(field, disp);
    for (double w : summary.weights) rep.weight_sum += w;
    rep.p_approx = separated_expectation(summary, std::function<Vec3(const Vec3&)>(
                                                      [](const Vec3& k) { return k; }))
                       .value;
    rep.E_approx = separated_expectation(summary, std::function<double(const Vec3&)>([&](const Vec3& k) {
                                             return disp.omega(k);
                                         }))
                       .value;
    const PacketVelocities pv = packet_velocities(summary, disp);
    rep.v_prob_approx = pv.v_prob;
    rep.v_energy_approx = pv.v_energy;
    rep.angle_approx_deg = angle_deg(pv.v_prob, pv.v_energy);

    ConvergeOptions copts;
    copts.initial_points = opts.points;
    copts.margin = opts.margin;
    copts.max_points = opts.max_points;
    copts.threads = opts.threads;
    rep.v_prob_convergence = converge(field, disp, "v_group", 0.0, opts.tol, copts);
    rep.v_energy_convergence = converge(field, disp, "v_energy", 0.0, opts.tol, copts);
    rep.converged = rep.v_prob_convergence.converged && rep.v_energy_convergence.converged;
    rep.v_prob_quad = std::get<Vec3>(rep.v_prob_convergence.value);
    rep.v_energy_quad = std::get<Vec3>(rep.v_energy_convergence.value);
    rep.angle_quad_deg = angle_deg(rep.v_prob_quad, rep.v_energy_quad);

    const GridSpec finest = rep.v_prob_convergence.levels.back().first;
    rep.final_points = finest.n[0];
    const ScalarMoments sm = scalar_moments(field, disp, finest, opts.threads);
    rep.norm_quad = sm.norm;
    rep.p_quad = sm.p_mean;
    rep.E_quad = sm.E_mean;

    rep.rel_disagreement_v_prob =
        (rep.v_prob_quad - rep.v_prob_approx).norm() / rep.v_prob_approx.norm();
    rep.rel_disagreement_v_energy =
        (rep.v_energy_quad - rep.v_energy_approx).norm() / rep.v_energy_approx.norm();
    rep.disagreement_flag =
        rep.rel_disagreement_v_prob > 0.02 || rep.rel_disagreement_v_energy > 0.02;
    rep.speed_reference = disp.light_speed();
    return rep;
}

} // namespace wavekin
