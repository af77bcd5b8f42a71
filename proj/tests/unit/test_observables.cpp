#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "wavekin/errors.hpp"
#include "wavekin/model_example.hpp"
#include "wavekin/observables.hpp"
#include "wavekin/quadrature.hpp"
#include "wavekin/warnings.hpp"

using namespace wavekin;

namespace {

// Dense-grid reference values for the built-in two-packet massless example,
// frozen from an independent 256^3 evaluation.
const Vec3 kRefP{0.976541220245, 0.650342493388, 0.0};
const double kRefNorm = 1.006901614881;
const double kRefE = 1.197303919798;
const Vec3 kRefVGroup{0.771392971237, 0.586332069492, 0.0};
const Vec3 kRefVEnergy{0.815616823846, 0.543172441544, 0.0};
const double kRefAngleDeg = 3.576055;
// same field under quadratic dispersion with m = 1
const double kRefQuadE = 0.782158570396;
const Vec3 kRefQuadVEnergy{1.162739598228, 0.697092931940, 0.0};
const double kRefQuadBoostGap = 1.2469478495;

GridSpec example_spec(int n = 64) { return auto_grid(model_example_field(), 6.5, n); }

} // namespace

TEST_CASE("single Gaussian reproduces its analytic moments") {
    const Vec3 k0{1, 0, 0};
    const Vec3 r0{2, -1, 0};
    const double width = 0.1;
    auto field = SpectralField::gaussians({{1.0, k0, width, r0}});
    const auto disp = DispersionRelation::quadratic(1.0);
    const GridSpec spec = auto_grid(field, 6.5, 64);

    const auto m = scalar_moments(field, disp, spec);
    CHECK(m.norm == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(m.p_mean.x == doctest::Approx(k0.x).epsilon(1e-9));
    CHECK(std::fabs(m.p_mean.y) < 1e-12);
    CHECK(std::fabs(m.p_mean.z) < 1e-12);
    // <E> = <k^2>/2m with <k^2> = k0^2 + 1.5 width^2
    CHECK(m.E_mean == doctest::Approx(0.5075).epsilon(1e-6));

    const Vec3 r = probability_centroid(field, disp, spec, 0.0);
    CHECK(r.x == doctest::Approx(r0.x).epsilon(1e-9));
    CHECK(r.y == doctest::Approx(r0.y).epsilon(1e-9));
    CHECK(std::fabs(r.z) < 1e-9);

    // L = r0 x k0
    const Vec3 L = orbital_angular_momentum(field, disp, spec, 0.0);
    const Vec3 expected = cross(r0, k0);
    CHECK(L.x == doctest::Approx(expected.x).epsilon(1e-9));
    CHECK(L.y == doctest::Approx(expected.y).epsilon(1e-9));
    CHECK(L.z == doctest::Approx(expected.z).epsilon(1e-9));
}

TEST_CASE("centroid of an offset packet moves with the group velocity") {
    auto field = SpectralField::gaussians({{1.0, {0, 2, 0}, 0.1, {0, 2, 0}}});
    const auto disp = DispersionRelation::quadratic(2.0);
    const GridSpec spec = auto_grid(field, 6.5, 56);

    const Vec3 r0 = probability_centroid(field, disp, spec, 0.0);
    const Vec3 vg = mean_group_velocity(field, disp, spec);
    for (double t : {1.0, 4.0}) {
        const Vec3 rt = probability_centroid(field, disp, spec, t);
        const Vec3 predicted = r0 + vg * t;
        CHECK((rt - predicted).max_abs() < 1e-10);
    }
    // quadratic dispersion: exact Ehrenfest, v_g = p/m
    const auto m = scalar_moments(field, disp, spec);
    CHECK((vg - m.p_mean * 0.5).max_abs() < 1e-14);
}

TEST_CASE("energy and probability centroids agree for one symmetric packet") {
    auto field = SpectralField::gaussians({{1.0, {1, 0, 0}, 0.1, {2, -1, 0}}});
    const auto disp = DispersionRelation::massless(1.0);
    const GridSpec spec = auto_grid(field, 6.5, 56);
    const Vec3 r = probability_centroid(field, disp, spec, 0.0);
    const Vec3 rE = energy_centroid(field, disp, spec, 0.0);
    // they split only at O((width/k0)^2)
    CHECK((rE - r).norm() < 3.0 * 0.01 * r.norm());
}

TEST_CASE("quadratic energy-centroid velocity exceeds the group velocity") {
    auto field = SpectralField::gaussians({{1.0, {1, 0, 0}, 0.1, {0, 0, 0}}});
    const auto disp = DispersionRelation::quadratic(1.0);
    const GridSpec spec = auto_grid(field, 6.5, 64);

    const Vec3 vg = mean_group_velocity(field, disp, spec);
    const Vec3 vE = energy_centroid_velocity(field, disp, spec);
    // <k^2 k>/ (m <k^2>) = 1.025/1.015 along x for this packet
    CHECK(vg.x == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(vE.x == doctest::Approx(1.025 / 1.015).epsilon(1e-8));
    CHECK(std::fabs(vE.y) < 1e-12);
    // collinear by symmetry but faster
    CHECK(vE.x > vg.x);
}

TEST_CASE("two-packet example matches the frozen dense-grid reference") {
    auto field = model_example_field();
    const auto disp = model_example_dispersion();
    const GridSpec spec = example_spec();

    const auto m = scalar_moments(field, disp, spec);
    CHECK(m.norm == doctest::Approx(kRefNorm).epsilon(1e-9));
    CHECK(m.p_mean.x == doctest::Approx(kRefP.x).epsilon(1e-9));
    CHECK(m.p_mean.y == doctest::Approx(kRefP.y).epsilon(1e-9));
    CHECK(m.E_mean == doctest::Approx(kRefE).epsilon(1e-9));

    const Vec3 vg = mean_group_velocity(field, disp, spec);
    CHECK(vg.x == doctest::Approx(kRefVGroup.x).epsilon(1e-9));
    CHECK(vg.y == doctest::Approx(kRefVGroup.y).epsilon(1e-9));

    const Vec3 vE = energy_centroid_velocity(field, disp, spec);
    CHECK(vE.x == doctest::Approx(kRefVEnergy.x).epsilon(1e-9));
    CHECK(vE.y == doctest::Approx(kRefVEnergy.y).epsilon(1e-9));

    CHECK(angle_deg(vg, m.p_mean) > 1.0);
    CHECK(angle_deg(vg, vE) == doctest::Approx(kRefAngleDeg).epsilon(1e-6));
    CHECK(vg.norm() < 1.0);
    CHECK(vE.norm() < 1.0);

    // quadratic dispersion on the same spectrum: velocities become collinear
    const auto quad = DispersionRelation::quadratic(1.0);
    const auto mq = scalar_moments(field, quad, spec);
    const Vec3 vgq = mean_group_velocity(field, quad, spec);
    CHECK(cross(vgq, mq.p_mean).norm() <= 1e-12 * vgq.norm() * mq.p_mean.norm());
    CHECK(angle_deg(vgq, mq.p_mean) < 1e-5);
    CHECK(mq.E_mean == doctest::Approx(kRefQuadE).epsilon(1e-9));
    const Vec3 vEq = energy_centroid_velocity(field, quad, spec);
    CHECK(vEq.x == doctest::Approx(kRefQuadVEnergy.x).epsilon(1e-9));
    CHECK(vEq.y == doctest::Approx(kRefQuadVEnergy.y).epsilon(1e-9));
    CHECK(angle_deg(vEq, mq.p_mean) > 1.0);
}

TEST_CASE("relativistic energy-centroid velocity equals c^2 p/E") {
    auto field = model_example_field();
    const GridSpec spec = example_spec(48);
    for (const auto& disp :
         {DispersionRelation::massless(1.0), DispersionRelation::relativistic(0.6, 1.7)}) {
        const auto m = scalar_moments(field, disp, spec);
        const Vec3 vE = energy_centroid_velocity(field, disp, spec);
        const double c = disp.light_speed();
        const Vec3 expected = m.p_mean * (c * c / m.E_mean);
        CHECK((vE - expected).max_abs() <= 1e-12 * expected.max_abs());
    }
}

TEST_CASE("boost momentum is conserved only for relativistic kinds") {
    auto field = model_example_field();
    const GridSpec spec = example_spec();

    const auto massless = model_example_dispersion();
    const Vec3 n0 = boost_momentum(field, massless, spec, 0.0);
    const Vec3 n3 = boost_momentum(field, massless, spec, 3.0);
    const Vec3 n10 = boost_momentum(field, massless, spec, 10.0);
    CHECK((n3 - n0).max_abs() < 1e-8);
    CHECK((n10 - n0).max_abs() < 1e-8);

    const auto quad = DispersionRelation::quadratic(1.0);
    const Vec3 q0 = boost_momentum(field, quad, spec, 0.0);
    const Vec3 q10 = boost_momentum(field, quad, spec, 10.0);
    const double gap = (q10 - q0).norm();
    CHECK(gap > 1e-3);
    CHECK(gap == doctest::Approx(kRefQuadBoostGap).epsilon(1e-6));
}

TEST_CASE("orbital angular momentum is time-independent and additive over packets") {
    auto field = SpectralField::gaussians(
        {{0.6, {0.3, 0.5, 0}, 0.06, {1, 0, 2}}, {0.8, {1.2, 0.7, 0}, 0.08, {0, -1, 1}}});
    const auto disp = model_example_dispersion();
    const GridSpec spec = auto_grid(field, 6.5, 56);

    const Vec3 L0 = orbital_angular_momentum(field, disp, spec, 0.0);
    const Vec3 L7 = orbital_angular_momentum(field, disp, spec, 7.0);
    CHECK((L7 - L0).max_abs() < 1e-12 * std::max(1.0, L0.max_abs()));

    // separated packets: L = sum of |A|^2 (r_j x k_j), weights normalized
    const double w1 = 0.36, w2 = 0.64;
    const Vec3 expected =
        (cross({1, 0, 2}, {0.3, 0.5, 0}) * w1 + cross({0, -1, 1}, {1.2, 0.7, 0}) * w2) *
        (1.0 / (w1 + w2));
    CHECK((L0 - expected).norm() < 1e-9 * expected.norm());
}

TEST_CASE("kernel centroids agree with the explicit-phase route") {
    auto field = SpectralField::gaussians(
        {{0.5, {0.3, 0.5, 0}, 0.1, {0.5, 0, -1}}, {0.87, {1.2, 0.7, 0}, 0.15, {0, 1, 0.5}}});
    const auto disp = model_example_dispersion();
    const GridSpec spec = auto_grid(field, 6.5, 48);
    const double t = 3.0;

    // build the same moments from the public evolved amplitude and gradient
    const double norm = integrate(spec, [&](int, int, int, const Vec3& k) {
        return std::norm(field.amplitude_at(disp, k, t));
    });
    const CVec3 moment = integrate(spec, [&](int, int, int, const Vec3& k) {
        return field.spectral_gradient(disp, k, t) * std::conj(field.amplitude_at(disp, k, t));
    });
    const Vec3 r_direct = -moment.imag() * (1.0 / norm);

    const Vec3 r_kernel = probability_centroid(field, disp, spec, t);
    CHECK((r_direct - r_kernel).max_abs() < 1e-12 * std::max(1.0, r_kernel.max_abs()));

    // <L> = Im[conj(psi) k x grad psi] integrated, rebuilt the slow way
    const Vec3 L_direct =
        integrate(spec,
                  [&](int, int, int, const Vec3& k) {
                      const Complex cpsi = std::conj(field.amplitude_at(disp, k, t));
                      const CVec3 g = field.spectral_gradient(disp, k, t);
                      return cross(k, CVec3{cpsi * g.x, cpsi * g.y, cpsi * g.z}.imag());
                  }) *
        (1.0 / norm);
    const Vec3 L_kernel = orbital_angular_momentum(field, disp, spec, t);
    CHECK((L_direct - L_kernel).max_abs() < 1e-12 * std::max(1.0, L_kernel.max_abs()));
}

TEST_CASE("angular momentum splits close for both centroid kinds") {
    auto field = SpectralField::gaussians(
        {{0.5, {0.3, 0.5, 0}, 0.1, {0.5, 0, -1}}, {0.87, {1.2, 0.7, 0}, 0.15, {0, 1, 0.5}}});
    const auto disp = model_example_dispersion();
    const GridSpec spec = auto_grid(field, 6.5, 48);

    const auto s = kinematic_state(field, disp, spec, 2.0);
    CHECK((s.L_ext_prob + s.L_int_prob - s.L_total).max_abs() <=
          1e-13 * std::max(1.0, s.L_total.max_abs()));
    CHECK((s.L_ext_energy + s.L_int_energy - s.L_total).max_abs() <=
          1e-13 * std::max(1.0, s.L_total.max_abs()));

    const auto [ext_p, int_p] =
        decompose_angular_momentum(field, disp, spec, 2.0, CentroidKind::Probability);
    CHECK((ext_p - cross(s.r_prob, s.p_mean)).max_abs() < 1e-12);
    CHECK((ext_p + int_p - s.L_total).max_abs() < 1e-13 * std::max(1.0, s.L_total.max_abs()));

    const auto [ext_e, int_e] =
        decompose_angular_momentum(field, disp, spec, 2.0, CentroidKind::Energy);
    CHECK((ext_e - cross(s.r_energy, s.p_mean)).max_abs() < 1e-12);

    // definitional boost-momentum consistency
    const Vec3 n_expected =
        s.p_mean * (s.t * disp.light_speed()) - s.r_energy * (s.E_mean / disp.light_speed());
    CHECK((s.N_boost - n_expected).max_abs() < 1e-14 * std::max(1.0, n_expected.max_abs()));
}

TEST_CASE("energy-kind extrinsic angular momentum is conserved, probability-kind drifts") {
    auto field = model_example_field();
    const auto disp = model_example_dispersion();
    const GridSpec spec = example_spec();

    const auto states = trajectory(field, disp, spec, 0.0, 10.0, 6);
    const Vec3 e0 = states.front().L_ext_energy;
    for (const auto& s : states) CHECK((s.L_ext_energy - e0).max_abs() < 1e-10);

    // probability-kind rate equals v_group x p_mean; z component is the frozen
    // reference -0.0709078
    const auto& a = states.front();
    const auto& b = states.back();
    const Vec3 rate = (b.L_ext_prob - a.L_ext_prob) * (1.0 / (b.t - a.t));
    const Vec3 predicted = cross(a.v_group, a.p_mean);
    CHECK((rate - predicted).max_abs() < 1e-10);
    CHECK(rate.z == doctest::Approx(-0.070907806314).epsilon(1e-6));
}

TEST_CASE("trajectories conserve scalars and stay on straight centroid lines") {
    auto field = SpectralField::gaussians(
        {{Complex(0.3, 0.4), {0.5, 1.0, -0.2}, 0.08, {1, 2, 0}},
         {Complex(0.7, -0.1), {1.4, 0.2, 0.3}, 0.12, {-0.5, 0, 1}}});
    const auto disp = DispersionRelation::relativistic(0.8, 1.0);
    const GridSpec spec = auto_grid(field, 6.5, 48);

    const auto states = trajectory(field, disp, spec, 0.0, 10.0, 11);
    CHECK(states.size() == 11);
    CHECK(states.front().t == 0.0);
    CHECK(states.back().t == 10.0);

    const auto& s0 = states.front();
    for (const auto& s : states) {
        CHECK(std::fabs(s.norm - s0.norm) <= 1e-10 * s0.norm);
        CHECK(std::fabs(s.E_mean - s0.E_mean) <= 1e-10 * s0.E_mean);
        CHECK((s.p_mean - s0.p_mean).max_abs() <= 1e-10 * s0.p_mean.max_abs());
        CHECK((s.L_total - s0.L_total).max_abs() <= 1e-10 * std::max(1.0, s0.L_total.max_abs()));
        CHECK((s.N_boost - s0.N_boost).max_abs() <= 1e-8);

        // linearity against the state's own velocities
        const Vec3 r_pred = s0.r_prob + s0.v_group * s.t;
        const Vec3 rE_pred = s0.r_energy + s0.v_energy * s.t;
        CHECK((s.r_prob - r_pred).max_abs() < 1e-9);
        CHECK((s.r_energy - rE_pred).max_abs() < 1e-9);

        CHECK(s.v_group.norm() <= 1.0 + 1e-12);
        CHECK(s.v_energy.norm() <= 1.0 + 1e-12);
    }

    const auto two = trajectory(field, disp, spec, 0.0, 1.0, 2);
    CHECK(two.size() == 2);
    CHECK_THROWS_AS(trajectory(field, disp, spec, 0.0, 1.0, 1), DomainError);
    CHECK_THROWS_AS(trajectory(field, disp, spec, 1.0, 1.0, 5), DomainError);
}

TEST_CASE("degenerate spectra are rejected rather than normalized") {
    auto field = SpectralField::gaussians({{1e-200, {1, 0, 0}, 0.1, {0, 0, 0}}});
    const GridSpec spec = auto_grid(field, 6.5, 32);
    CHECK_THROWS_AS(scalar_moments(field, DispersionRelation::massless(1.0), spec),
                    DegenerateFieldError);
}

TEST_CASE("asymmetric truncation trips the imaginary-part guard") {
    auto field = model_example_field();
    const auto disp = model_example_dispersion();
    const GridSpec spec = auto_grid(field, 4.0, 48);
    CHECK_THROWS_AS(probability_centroid(field, disp, spec, 0.0), NumericalConsistencyError);
}

TEST_CASE("origin nodes under massless dispersion are regularized with a warning") {
    std::vector<std::string> seen;
    set_warning_handler([&](const std::string& m) { seen.push_back(m); });

    auto field = SpectralField::gaussians({{1.0, {0, 0, 0}, 0.2, {0, 0, 0}}});
    GridSpec spec({-1.4, -1.4, -1.4}, {1.4, 1.4, 1.4}, {15, 15, 15});
    const Vec3 vg = mean_group_velocity(field, model_example_dispersion(), spec);
    set_warning_handler(nullptr);

    CHECK(vg.max_abs() < 1e-12);
    REQUIRE(!seen.empty());
    CHECK(seen.front().find("regularized") != std::string::npos);
}

TEST_CASE("sampled grids must be integrated on their own spec") {
    GridSpec own({-1.2, -1.2, -1.2}, {1.2, 1.2, 1.2}, {17, 17, 17});
    std::vector<Complex> samples(static_cast<std::size_t>(own.size()));
    for (int ix = 0; ix < 17; ++ix)
        for (int iy = 0; iy < 17; ++iy)
            for (int iz = 0; iz < 17; ++iz)
                samples[own.flat_index(ix, iy, iz)] =
                    std::exp(-own.node(ix, iy, iz).norm2() / 0.03);
    auto field = SpectralField::grid(own, std::move(samples));
    const auto disp = DispersionRelation::relativistic(1.0, 1.0);

    CHECK(scalar_moments(field, disp, own).norm > 0.0);
    GridSpec other({-1.2, -1.2, -1.2}, {1.2, 1.2, 1.2}, {33, 33, 33});
    CHECK_THROWS_AS(scalar_moments(field, disp, other), UsageError);
}

TEST_CASE("convergence ladder is node-nested and reports its levels") {
    auto field = SpectralField::gaussians({{1.0, {1, 0, 0}, 0.1, {0, 0, 0}}});
    const auto disp = DispersionRelation::massless(1.0);

    ConvergeOptions opts;
    opts.initial_points = 17;
    opts.margin = 6.5;
    const auto norm_report = converge(field, disp, "norm", 0.0, 1e-8, opts);
    CHECK(norm_report.converged);
    CHECK(std::get<double>(norm_report.value) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(norm_report.levels.size() >= 2);
    for (std::size_t i = 1; i < norm_report.levels.size(); ++i)
        CHECK(norm_report.levels[i].first.n[0] == 2 * norm_report.levels[i - 1].first.n[0] - 1);

    const auto p_report = converge(field, disp, "p_mean", 0.0, 1e-8, opts);
    CHECK(p_report.converged);
    CHECK((std::get<Vec3>(p_report.value) - Vec3{1, 0, 0}).max_abs() < 1e-8);

    // cap hit: flagged, not thrown
    ConvergeOptions tight = opts;
    tight.max_points = 33;
    const auto capped = converge(field, disp, "E_mean", 0.0, 1e-16, tight);
    CHECK(!capped.converged);
    CHECK(capped.levels.back().first.n[0] <= 33);

    CHECK_THROWS_AS(converge(field, disp, "entropy", 0.0, 1e-8, opts), ConfigError);
    CHECK_THROWS_AS(converge(field, disp, "norm", 0.0, -1.0, opts), DomainError);
    ConvergeOptions bad = opts;
    bad.initial_points = 99;
    bad.max_points = 65;
    CHECK_THROWS_AS(converge(field, disp, "norm", 0.0, 1e-8, bad), DomainError);
}

TEST_CASE("observable names cover the full kinematic state") {
    const auto& names = observable_names();
    CHECK(names.size() == 9);
    CHECK(std::find(names.begin(), names.end(), "v_energy") != names.end());
    CHECK(std::find(names.begin(), names.end(), "N_boost") != names.end());
}
