#include "wavekin/approx.hpp"

#include <cmath>
#include <limits>

#include "wavekin/errors.hpp"
#include "wavekin/warnings.hpp"

namespace wavekin {

namespace {

void warn_if_untrusted(const SeparatedPacketSummary& s) {
    if (!s.trusted())
        warn("separated-packet approximation outside its validity range "
             "(packets too wide or too close); result is untrusted");
}

} // namespace

SeparatedPacketSummary SeparatedPacketSummary::from_field(const SpectralField& field,
                                                          const DispersionRelation& disp) {
    const auto& comps = field.components();
    SeparatedPacketSummary s;
    s.weights.reserve(comps.size());
    s.centers.reserve(comps.size());
    s.frequencies.reserve(comps.size());
    for (const auto& g : comps) {
        s.weights.push_back(std::norm(g.amplitude));
        s.centers.push_back(g.center);
        s.frequencies.push_back(disp.omega(g.center));
    }

    s.min_separation_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < comps.size(); ++i)
        for (std::size_t j = i + 1; j < comps.size(); ++j) {
            const double sep = (comps[i].center - comps[j].center).norm();
            const double width = std::max(comps[i].width, comps[j].width);
            s.min_separation_ratio = std::min(s.min_separation_ratio, sep / width);
        }

    s.min_center_ratio = std::numeric_limits<double>::infinity();
    for (const auto& g : comps)
        s.min_center_ratio = std::min(s.min_center_ratio, g.center.norm() / g.width);

    return s;
}

Approximation<double> separated_expectation(const SeparatedPacketSummary& summary,
                                            const std::function<double(const Vec3&)>& Q) {
    if (summary.weights.empty()) throw ConfigError("separated expectation of an empty summary");
    warn_if_untrusted(summary);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < summary.weights.size(); ++j) {
        num += summary.weights[j] * Q(summary.centers[j]);
        den += summary.weights[j];
    }
    return {num / den, summary.trusted()};
}

Approximation<Vec3> separated_expectation(const SeparatedPacketSummary& summary,
                                          const std::function<Vec3(const Vec3&)>& Q) {
    if (summary.weights.empty()) throw ConfigError("separated expectation of an empty summary");
    warn_if_untrusted(summary);
    Vec3 num;
    double den = 0.0;
    for (std::size_t j = 0; j < summary.weights.size(); ++j) {
        num += Q(summary.centers[j]) * summary.weights[j];
        den += summary.weights[j];
    }
    return {num / den, summary.trusted()};
}

PacketVelocities packet_velocities(const SeparatedPacketSummary& summary,
                                   const DispersionRelation& disp) {
    if (summary.weights.empty()) throw ConfigError("packet velocities of an empty summary");
    warn_if_untrusted(summary);
    Vec3 num_prob, num_energy;
    double den_prob = 0.0, den_energy = 0.0;
    for (std::size_t j = 0; j < summary.weights.size(); ++j) {
        const double w = summary.weights[j];
        const Vec3 vg = disp.group_velocity(summary.centers[j]);
        num_prob += vg * w;
        den_prob += w;
        num_energy += vg * (w * summary.frequencies[j]);
        den_energy += w * summary.frequencies[j];
    }
    return {num_prob / den_prob, num_energy / den_energy, summary.trusted()};
}

} // namespace wavekin
