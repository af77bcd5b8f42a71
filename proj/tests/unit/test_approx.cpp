#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "wavekin/approx.hpp"
#include "wavekin/errors.hpp"
#include "wavekin/model_example.hpp"
#include "wavekin/observables.hpp"
#include "wavekin/quadrature.hpp"
#include "wavekin/warnings.hpp"

using namespace wavekin;

namespace {

// independently derived closed forms for the built-in two-packet example
const Vec3 kApproxP{0.976541861158, 0.650342635813, 0.0};
const double kApproxE = 1.189088174528343;
const Vec3 kApproxVProb{0.777056499103, 0.591670682935, 0.0};
const Vec3 kApproxVEnergy{0.821252689310, 0.546925492780, 0.0};
const double kApproxAngleDeg = 3.624349;

} // namespace

TEST_CASE("single packet: every expectation collapses to its center value") {
    auto field = SpectralField::gaussians({{0.8, {1.5, 0, 0}, 0.1, {2, 1, 0}}});
    const auto disp = DispersionRelation::massless(1.0);
    const auto summary = SeparatedPacketSummary::from_field(field, disp);

    CHECK(summary.weights.size() == 1);
    CHECK(summary.weights[0] == doctest::Approx(0.64).epsilon(1e-15));
    CHECK(summary.centers[0] == Vec3{1.5, 0, 0});
    CHECK(summary.frequencies[0] == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(std::isinf(summary.min_separation_ratio));
    CHECK(summary.min_center_ratio == doctest::Approx(15.0).epsilon(1e-15));
    CHECK(summary.trusted());

    const auto q = separated_expectation(summary, std::function<double(const Vec3&)>(
                                                      [](const Vec3& k) { return k.norm2(); }));
    CHECK(q.trusted);
    CHECK(q.value == doctest::Approx(2.25).epsilon(1e-15));

    const auto v = packet_velocities(summary, disp);
    CHECK(v.trusted);
    const Vec3 vg = disp.group_velocity({1.5, 0, 0});
    CHECK((v.v_prob - vg).max_abs() < 1e-15);
    CHECK((v.v_energy - vg).max_abs() < 1e-15);
}

TEST_CASE("packet order does not change the velocities") {
    const GaussianComponent a{0.5, {0.3, 0.5, 0}, 0.1, {0, 0, 0}};
    const GaussianComponent b{0.87, {1.2, 0.7, 0}, 0.15, {0, 0, 0}};
    const auto disp = DispersionRelation::massless(1.0);

    const auto ab = packet_velocities(
        SeparatedPacketSummary::from_field(SpectralField::gaussians({a, b}), disp), disp);
    const auto ba = packet_velocities(
        SeparatedPacketSummary::from_field(SpectralField::gaussians({b, a}), disp), disp);
    CHECK((ab.v_prob - ba.v_prob).max_abs() < 1e-15);
    CHECK((ab.v_energy - ba.v_energy).max_abs() < 1e-15);
}

TEST_CASE("two-packet example closed forms") {
    auto field = model_example_field();
    const auto disp = model_example_dispersion();
    const auto summary = SeparatedPacketSummary::from_field(field, disp);

    // ratios: separation 0.92195/0.15, nearest center sqrt(0.34)/0.1
    CHECK(summary.min_separation_ratio == doctest::Approx(6.146363).epsilon(1e-6));
    CHECK(summary.min_center_ratio == doctest::Approx(5.830952).epsilon(1e-6));
    CHECK(summary.trusted());

    const auto p = separated_expectation(
        summary, std::function<Vec3(const Vec3&)>([](const Vec3& k) { return k; }));
    CHECK(p.value.x == doctest::Approx(kApproxP.x).epsilon(1e-11));
    CHECK(p.value.y == doctest::Approx(kApproxP.y).epsilon(1e-11));

    const auto e = separated_expectation(summary, std::function<double(const Vec3&)>([&](
                                                      const Vec3& k) { return disp.omega(k); }));
    CHECK(e.value == doctest::Approx(kApproxE).epsilon(1e-12));

    const auto v = packet_velocities(summary, disp);
    CHECK(v.v_prob.x == doctest::Approx(kApproxVProb.x).epsilon(1e-11));
    CHECK(v.v_prob.y == doctest::Approx(kApproxVProb.y).epsilon(1e-11));
    CHECK(v.v_energy.x == doctest::Approx(kApproxVEnergy.x).epsilon(1e-11));
    CHECK(v.v_energy.y == doctest::Approx(kApproxVEnergy.y).epsilon(1e-11));
    CHECK(angle_deg(v.v_prob, v.v_energy) == doctest::Approx(kApproxAngleDeg).epsilon(1e-6));

    // massless: v_energy = c^2 sum(w k) / sum(w omega), collinear with sum(w k)
    CHECK(cross(v.v_energy, p.value).norm() < 1e-15 * v.v_energy.norm() * p.value.norm());
    const Vec3 reduced = p.value * (1.0 / e.value);
    CHECK((v.v_energy - reduced).max_abs() < 1e-14);
}

TEST_CASE("closed forms track the quadrature within the separation error model") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> mag(1.2, 2.0), wid(0.05, 0.08), amp(0.4, 1.0),
        unit(-1.0, 1.0);
    const auto disp = DispersionRelation::massless(1.0);

    for (int trial = 0; trial < 5; ++trial) {
        // rejection-sample three separated centers off the origin
        std::vector<GaussianComponent> comps;
        while (comps.size() < 3) {
            Vec3 dir{unit(rng), unit(rng), unit(rng)};
            if (dir.norm() < 0.3 || dir.norm() > 1.0) continue;
            const Vec3 k0 = dir * (mag(rng) / dir.norm());
            bool clear = true;
            for (const auto& c : comps)
                if ((c.center - k0).norm() < 1.0) clear = false;
            if (!clear) continue;
            comps.push_back({amp(rng), k0, wid(rng), {0, 0, 0}});
        }
        auto field = SpectralField::gaussians(comps);
        const auto summary = SeparatedPacketSummary::from_field(field, disp);
        REQUIRE(summary.trusted());

        double max_width = 0.0, min_center = 1e300;
        for (const auto& c : comps) {
            max_width = std::max(max_width, c.width);
            min_center = std::min(min_center, c.center.norm());
        }
        const double budget = 3.0 * (max_width / min_center) * (max_width / min_center);

        const GridSpec spec = auto_grid(field, 6.5, 96);
        const auto m = scalar_moments(field, disp, spec);
        const Vec3 vg = mean_group_velocity(field, disp, spec);
        const Vec3 vE = energy_centroid_velocity(field, disp, spec);

        const auto v = packet_velocities(summary, disp);
        const auto p = separated_expectation(
            summary, std::function<Vec3(const Vec3&)>([](const Vec3& k) { return k; }));

        CHECK((v.v_prob - vg).norm() <= budget * vg.norm());
        CHECK((v.v_energy - vE).norm() <= budget * vE.norm());
        CHECK((p.value - m.p_mean).norm() <= budget * m.p_mean.norm());
    }
}

TEST_CASE("overlapping packets are flagged and warned about") {
    std::vector<std::string> seen;
    set_warning_handler([&](const std::string& m) { seen.push_back(m); });

    auto field = SpectralField::gaussians(
        {{1.0, {1.0, 0, 0}, 0.1, {0, 0, 0}}, {1.0, {1.3, 0, 0}, 0.1, {0, 0, 0}}});
    const auto disp = DispersionRelation::massless(1.0);
    const auto summary = SeparatedPacketSummary::from_field(field, disp);
    CHECK(!summary.trusted());
    CHECK(summary.min_separation_ratio == doctest::Approx(3.0).epsilon(1e-12));

    const auto v = packet_velocities(summary, disp);
    set_warning_handler(nullptr);

    CHECK(!v.trusted);
    REQUIRE(!seen.empty());
    CHECK(seen.front().find("validity") != std::string::npos);
}

TEST_CASE("empty summaries and sampled fields are rejected") {
    SeparatedPacketSummary empty;
    CHECK_THROWS_AS(separated_expectation(
                        empty, std::function<double(const Vec3&)>([](const Vec3&) { return 1.0; })),
                    ConfigError);
    CHECK_THROWS_AS(packet_velocities(empty, DispersionRelation::massless(1.0)), ConfigError);

    GridSpec spec({-1, -1, -1}, {1, 1, 1}, {9, 9, 9});
    std::vector<Complex> samples(static_cast<std::size_t>(spec.size()));
    for (int ix = 0; ix < 9; ++ix)
        for (int iy = 0; iy < 9; ++iy)
            for (int iz = 0; iz < 9; ++iz)
                samples[spec.flat_index(ix, iy, iz)] =
                    std::exp(-spec.node(ix, iy, iz).norm2() / 0.02);
    auto sampled = SpectralField::grid(spec, std::move(samples));
    CHECK_THROWS_AS(SeparatedPacketSummary::from_field(sampled, DispersionRelation::massless(1.0)),
                    UsageError);
}

TEST_CASE("example report agrees across both routes") {
    ModelExampleOptions opts;
    opts.points = 33;
    const auto rep = model_example_report(opts);

    CHECK(rep.converged);
    CHECK(rep.final_points == 65);
    CHECK(rep.weight_sum == doctest::Approx(1.0069).epsilon(1e-12));
    CHECK(!rep.renormalized);

    CHECK(rep.p_approx.x == doctest::Approx(kApproxP.x).epsilon(1e-9));
    CHECK(rep.E_approx == doctest::Approx(kApproxE).epsilon(1e-9));
    CHECK(rep.v_prob_approx.x == doctest::Approx(kApproxVProb.x).epsilon(1e-9));
    CHECK(rep.v_energy_approx.y == doctest::Approx(kApproxVEnergy.y).epsilon(1e-9));
    CHECK(rep.angle_approx_deg == doctest::Approx(kApproxAngleDeg).epsilon(1e-6));

    CHECK(rep.norm_quad == doctest::Approx(1.006901614881).epsilon(1e-9));
    CHECK(rep.E_quad == doctest::Approx(1.197303919798).epsilon(1e-9));
    CHECK(rep.angle_quad_deg == doctest::Approx(3.576055).epsilon(1e-6));

    // routes disagree by a real but sub-percent-scale margin
    CHECK(rep.rel_disagreement_v_prob > 1e-3);
    CHECK(rep.rel_disagreement_v_prob < 0.02);
    CHECK(rep.rel_disagreement_v_energy > 1e-3);
    CHECK(rep.rel_disagreement_v_energy < 0.02);
    CHECK(!rep.disagreement_flag);
    CHECK(rep.speed_reference == 1.0);

    CHECK(rep.v_prob_quad.norm() < rep.speed_reference);
    CHECK(rep.v_energy_quad.norm() < rep.speed_reference);
    CHECK(rep.v_prob_quad.norm() < rep.v_energy_quad.norm());
}
