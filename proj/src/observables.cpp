#include "wavekin/observables.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "wavekin/errors.hpp"
#include "wavekin/quadrature.hpp"
#include "wavekin/warnings.hpp"

namespace wavekin {

namespace {

// Raw weighted sums of every integrand the kinematic quantities need, so one
// grid pass serves all of them and identities between observables hold by
// construction rather than by luck.
//
// The free-evolution phase e^{-i omega t} cancels in every channel
// (psi(t)* X psi(t) carries |phase|^2 = 1 algebraically), so it is never
// evaluated here; t enters only through the -i t (grad omega) psi term of the
// factorized gradient. The public amplitude_at/spectral_gradient keep the
// explicit phase, and a test cross-checks the two routes.
struct MomentSums {
    double norm = 0.0;   // |psi|^2
    Vec3 k1;             // |psi|^2 k
    double w1 = 0.0;     // |psi|^2 omega
    Vec3 g1;             // |psi|^2 grad omega
    Vec3 wg1;            // |psi|^2 omega grad omega
    CVec3 cg;            // psi(t)* grad psi(t)   (phase-cancelled)
    CVec3 wcg;           // omega psi(t)* grad psi(t)
    Vec3 L_num;          // Im[psi(t)* (k x grad psi(t))]

    MomentSums& operator+=(const MomentSums& o) {
        norm += o.norm;
        k1 += o.k1;
        w1 += o.w1;
        g1 += o.g1;
        wg1 += o.wg1;
        cg += o.cg;
        wcg += o.wcg;
        L_num += o.L_num;
        return *this;
    }
    friend MomentSums operator+(MomentSums a, const MomentSums& b) { return a += b; }
    friend MomentSums operator*(MomentSums a, double s) {
        a.norm *= s;
        a.k1 *= s;
        a.w1 *= s;
        a.g1 *= s;
        a.wg1 *= s;
        a.cg = a.cg * s;
        a.wcg = a.wcg * s;
        a.L_num *= s;
        return a;
    }
};

bool all_finite(const MomentSums& m) {
    return std::isfinite(m.norm) && m.k1.finite() && std::isfinite(m.w1) && m.g1.finite() &&
           m.wg1.finite() && m.cg.finite() && m.wcg.finite() && m.L_num.finite();
}

// Per-axis complex factors of one Gaussian component on a grid, amplitude and
// normalization folded in, so the inner loop is two complex multiplies per
// component instead of exponentials.
struct AxisTables {
    std::vector<Complex> x, y, z;
    Vec3 center;
    double inv_width2 = 0.0;
    Vec3 offset;
};

std::vector<AxisTables> build_tables(const std::vector<GaussianComponent>& comps,
                                     const GridSpec& spec) {
    std::vector<AxisTables> tables;
    tables.reserve(comps.size());
    for (const auto& g : comps) {
        AxisTables t;
        t.center = g.center;
        t.inv_width2 = 1.0 / (g.width * g.width);
        t.offset = g.offset;
        const double pref = std::pow(std::numbers::pi * g.width * g.width, -0.75);
        const Complex scaled_amp = g.amplitude * pref;
        auto fill = [&](std::vector<Complex>& out, int axis, double c0, double r0,
                        Complex amp) {
            out.resize(spec.n[axis]);
            for (int i = 0; i < spec.n[axis]; ++i) {
                const double k = spec.coord(axis, i);
                const double d = k - c0;
                out[i] = amp * std::polar(std::exp(-0.5 * d * d * t.inv_width2), -k * r0);
            }
        };
        fill(t.x, 0, g.center.x, g.offset.x, scaled_amp);
        fill(t.y, 1, g.center.y, g.offset.y, Complex(1.0, 0.0));
        fill(t.z, 2, g.center.z, g.offset.z, Complex(1.0, 0.0));
        tables.push_back(std::move(t));
    }
    return tables;
}

struct KernelResult {
    MomentSums sums;
    long regularized = 0;
};

KernelResult accumulate_moments(const SpectralField& field, const DispersionRelation& disp,
                                const GridSpec& spec, double t, int threads) {
    const bool gaussian = field.is_gaussian();
    if (!gaussian && !(spec == field.grid_spec()))
        throw UsageError("grid-sampled fields must be evaluated on their own grid");

    const std::vector<AxisTables> tables =
        gaussian ? build_tables(field.components(), spec) : std::vector<AxisTables>{};
    const std::vector<Complex>* samples = gaussian ? nullptr : &field.samples();

    const auto kind = disp.kind();
    const double m = disp.mass();
    const double c = disp.light_speed();
    std::atomic<long> regularized{0};

    auto integrand = [&](int ix, int iy, int iz, const Vec3& k) -> MomentSums {
        Complex psi;
        CVec3 grad;
        if (gaussian) {
            for (const auto& tb : tables) {
                const Complex v = tb.x[ix] * tb.y[iy] * tb.z[iz];
                psi += v;
                const Vec3 d = (k - tb.center) * (-tb.inv_width2);
                grad += CVec3{Complex(d.x, -tb.offset.x), Complex(d.y, -tb.offset.y),
                              Complex(d.z, -tb.offset.z)} *
                        v;
            }
        } else {
            psi = (*samples)[spec.flat_index(ix, iy, iz)];
            const bool shell = ix < 2 || ix > spec.n[0] - 3 || iy < 2 || iy > spec.n[1] - 3 ||
                               iz < 2 || iz > spec.n[2] - 3;
            if (!shell) {
                // 4th-order central differences on the stored t = 0 samples.
                auto at = [&](int jx, int jy, int jz) {
                    return (*samples)[spec.flat_index(jx, jy, jz)];
                };
                auto deriv = [](Complex m2, Complex m1, Complex p1, Complex p2, double h) {
                    return (m2 - p2 + 8.0 * (p1 - m1)) / (12.0 * h);
                };
                grad = {deriv(at(ix - 2, iy, iz), at(ix - 1, iy, iz), at(ix + 1, iy, iz),
                              at(ix + 2, iy, iz), spec.spacing(0)),
                        deriv(at(ix, iy - 2, iz), at(ix, iy - 1, iz), at(ix, iy + 1, iz),
                              at(ix, iy + 2, iz), spec.spacing(1)),
                        deriv(at(ix, iy, iz - 2), at(ix, iy, iz - 1), at(ix, iy, iz + 1),
                              at(ix, iy, iz + 2), spec.spacing(2))};
            }
            // else: the field's boundary-decay invariant bounds |psi| here by
            // ~1e-8 of the peak, so a zero gradient perturbs the gradient
            // channels below the quadrature tolerance.
        }

        const double kappa = k.norm();
        double omega = 0.0;
        Vec3 vg;
        switch (kind) {
            case DispersionRelation::Kind::Quadratic:
                omega = kappa * kappa / (2.0 * m);
                vg = k * (1.0 / m);
                break;
            case DispersionRelation::Kind::RelativisticMassive: {
                const double kc = kappa * c;
                const double mc2 = m * c * c;
                omega = std::sqrt(kc * kc + mc2 * mc2);
                if (omega > 0.0) {
                    vg = k * (c * c / omega);
                } else {
                    vg = {0.0, 0.0, 0.0}; // m = 0 at the origin node
                    regularized.fetch_add(1, std::memory_order_relaxed);
                }
                break;
            }
            case DispersionRelation::Kind::Massless:
                omega = kappa * c;
                if (kappa > 0.0) {
                    vg = k * (c / kappa);
                } else {
                    vg = {0.0, 0.0, 0.0};
                    regularized.fetch_add(1, std::memory_order_relaxed);
                }
                break;
            case DispersionRelation::Kind::CustomIsotropic:
                omega = disp.omega_radial(kappa);
                if (kappa > 0.0) {
                    vg = k * (disp.domega_radial(kappa) / kappa);
                } else {
                    vg = {0.0, 0.0, 0.0};
                    regularized.fetch_add(1, std::memory_order_relaxed);
                }
                break;
        }

        // Evolved gradient with the overall phase cancelled against psi*.
        const Complex minus_it(0.0, -t);
        const CVec3 G{grad.x + minus_it * vg.x * psi, grad.y + minus_it * vg.y * psi,
                      grad.z + minus_it * vg.z * psi};
        const Complex cpsi = std::conj(psi);
        const CVec3 CG{cpsi * G.x, cpsi * G.y, cpsi * G.z};

        MomentSums out;
        out.norm = std::norm(psi);
        out.k1 = k * out.norm;
        out.w1 = omega * out.norm;
        out.g1 = vg * out.norm;
        out.wg1 = vg * (omega * out.norm);
        out.cg = CG;
        out.wcg = CG * omega;
        out.L_num = cross(k, CG.imag());
        return out;
    };

    KernelResult result;
    result.sums = integrate(spec, integrand, threads);
    result.regularized = regularized.load();
    if (result.regularized > 0) {
        std::ostringstream msg;
        msg << "group velocity regularized to zero at " << result.regularized
            << " origin node(s) where its direction is undefined";
        warn(msg.str());
    }
    return result;
}

constexpr double kImagGuard = 1e-8;        // on Im of the position integral, relative to norm
constexpr double kSplitClosure = 1e-13;    // L_ext + L_int vs L_total
constexpr double kSubluminalSlack = 1e-12; // |v| <= c (1 + slack) for relativistic kinds

void require_norm(const MomentSums& s) {
    if (!(s.norm > 1e-300))
        throw DegenerateFieldError("field norm is below 1e-300; refusing to normalize");
}

void require_energy(const MomentSums& s) {
    if (!(s.w1 > 0.0))
        throw DegenerateFieldError("mean frequency vanishes; energy-weighted quantities undefined");
}

// Position integral is i * cg; its imaginary part Re(cg) signals asymmetric
// boundary truncation when it fails to vanish.
Vec3 guarded_r_prob(const MomentSums& s) {
    const Vec3 imag_part = s.cg.real();
    if (!(imag_part.max_abs() < kImagGuard * s.norm)) {
        std::ostringstream msg;
        msg << "probability centroid integral has imaginary part " << imag_part.max_abs()
            << " exceeding " << kImagGuard << " * norm (" << kImagGuard * s.norm
            << "); the grid does not contain the packet symmetrically enough";
        throw NumericalConsistencyError(msg.str());
    }
    return -s.cg.imag() / s.norm;
}

Vec3 r_energy_value(const MomentSums& s) {
    require_energy(s);
    // Im of the energy-position integral analytically equals -(1/2) <grad omega>
    // (integration by parts); deviations are logged, not fatal.
    const Vec3 predicted = s.g1 * -0.5;
    const Vec3 actual = s.wcg.real();
    if ((actual - predicted).max_abs() > 1e-8 * std::max(s.norm, std::fabs(s.w1))) {
        std::ostringstream msg;
        msg << "energy centroid integral imaginary part deviates from its analytic value by "
            << (actual - predicted).max_abs();
        warn(msg.str());
    }
    return -s.wcg.imag() / s.w1;
}

KinematicState state_from_sums(const MomentSums& s, const DispersionRelation& disp, double t) {
    require_norm(s);
    require_energy(s);
    KinematicState st;
    st.t = t;
    st.norm = s.norm;
    st.p_mean = s.k1 / s.norm;
    st.E_mean = s.w1 / s.norm;
    st.r_prob = guarded_r_prob(s);
    st.r_energy = r_energy_value(s);
    st.v_group = s.g1 / s.norm;
    st.v_energy = s.wg1 / s.w1;
    st.L_total = s.L_num / s.norm;

    const double c = disp.light_speed();
    st.N_boost = st.p_mean * (t * c) - st.r_energy * (st.E_mean / c);

    st.L_ext_prob = cross(st.r_prob, st.p_mean);
    st.L_int_prob = st.L_total - st.L_ext_prob;
    st.L_ext_energy = cross(st.r_energy, st.p_mean);
    st.L_int_energy = st.L_total - st.L_ext_energy;

    const double L_scale = std::max(1.0, st.L_total.max_abs());
    if ((st.L_ext_prob + st.L_int_prob - st.L_total).max_abs() > kSplitClosure * L_scale ||
        (st.L_ext_energy + st.L_int_energy - st.L_total).max_abs() > kSplitClosure * L_scale)
        throw NumericalConsistencyError("angular momentum split does not close");

    if (disp.relativistic_kind()) {
        const double limit = c * (1.0 + kSubluminalSlack);
        if (st.v_group.norm() > limit || st.v_energy.norm() > limit)
            throw NumericalConsistencyError("centroid velocity exceeds c under relativistic dispersion");
    }
    return st;
}

} // namespace

ScalarMoments scalar_moments(const SpectralField& field, const DispersionRelation& disp,
                             const GridSpec& spec, int threads) {
    const MomentSums s = accumulate_moments(field, disp, spec, 0.0, threads).sums;
    require_norm(s);
    return {s.norm, s.k1 / s.norm, s.w1 / s.norm};
}

Vec3 probability_centroid(const SpectralField& field, const DispersionRelation& disp,
                          const GridSpec& spec, double t, int threads) {
    const MomentSums s = accumulate_moments(field, disp, spec, t, threads).sums;
    require_norm(s);
    return guarded_r_prob(s);
}

Vec3 mean_group_velocity(const SpectralField& field, const DispersionRelation& disp,
                         const GridSpec& spec, int threads) {
    const MomentSums s = accumulate_moments(field, disp, spec, 0.0, threads).sums;
    require_norm(s);
    return s.g1 / s.norm;
}

Vec3 energy_centroid(const SpectralField& field, const DispersionRelation& disp,
                     const GridSpec& spec, double t, int threads) {
    const MomentSums s = accumulate_moments(field, disp, spec, t, threads).sums;
    require_norm(s);
    return r_energy_value(s);
}

Vec3 energy_centroid_velocity(const SpectralField& field, const DispersionRelation& disp,
                              const GridSpec& spec, int threads) {
    const MomentSums s = accumulate_moments(field, disp, spec, 0.0, threads).sums;
    require_norm(s);
    return s.wg1 / s.w1;
}

Vec3 boost_momentum(const SpectralField& field, const DispersionRelation& disp,
                    const GridSpec& spec, double t, int threads) {
    const MomentSums s = accumulate_moments(field, disp, spec, t, threads).sums;
    require_norm(s);
    const double c = disp.light_speed();
    const Vec3 p = s.k1 / s.norm;
    const double E = s.w1 / s.norm;
    return p * (t * c) - r_energy_value(s) * (E / c);
}

Vec3 orbital_angular_momentum(const SpectralField& field, const DispersionRelation& disp,
                              const GridSpec& spec, double t, int threads) {
    const MomentSums s = accumulate_moments(field, disp, spec, t, threads).sums;
    require_norm(s);
    return s.L_num / s.norm;
}

std::pair<Vec3, Vec3> decompose_angular_momentum(const SpectralField& field,
                                                 const DispersionRelation& disp,
                                                 const GridSpec& spec, double t,
                                                 CentroidKind kind, int threads) {
    const KinematicState st = kinematic_state(field, disp, spec, t, threads);
    if (kind == CentroidKind::Probability) return {st.L_ext_prob, st.L_int_prob};
    return {st.L_ext_energy, st.L_int_energy};
}

KinematicState kinematic_state(const SpectralField& field, const DispersionRelation& disp,
                               const GridSpec& spec, double t, int threads) {
    return state_from_sums(accumulate_moments(field, disp, spec, t, threads).sums, disp, t);
}

std::vector<KinematicState> trajectory(const SpectralField& field, const DispersionRelation& disp,
                                       const GridSpec& spec, double t0, double t1, int steps,
                                       int threads) {
    if (!(t1 > t0)) throw DomainError("trajectory needs t1 > t0");
    if (steps < 2) throw DomainError("trajectory needs at least 2 steps");
    std::vector<KinematicState> states;
    states.reserve(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        const double t = t0 + (t1 - t0) * i / (steps - 1);
        states.push_back(kinematic_state(field, disp, spec, t, threads));
    }
    return states;
}

const std::vector<std::string>& observable_names() {
    static const std::vector<std::string> names = {"norm",   "p_mean",   "E_mean",
                                                   "r_prob", "r_energy", "v_group",
                                                   "v_energy", "L_total", "N_boost"};
    return names;
}

namespace {

ObservableValue extract_observable(const MomentSums& s, const DispersionRelation& disp,
                                   const std::string& name, double t) {
    require_norm(s);
    if (name == "norm") return s.norm;
    if (name == "p_mean") return s.k1 / s.norm;
    if (name == "E_mean") return s.w1 / s.norm;
    if (name == "r_prob") return guarded_r_prob(s);
    if (name == "r_energy") return r_energy_value(s);
    if (name == "v_group") return s.g1 / s.norm;
    if (name == "v_energy") return s.wg1 / s.w1;
    if (name == "L_total") return s.L_num / s.norm;
    if (name == "N_boost") {
        const double c = disp.light_speed();
        return (s.k1 / s.norm) * (t * c) - r_energy_value(s) * ((s.w1 / s.norm) / c);
    }
    throw ConfigError("unknown observable '" + name + "'");
}

double value_diff(const ObservableValue& a, const ObservableValue& b) {
    if (std::holds_alternative<double>(a))
        return std::fabs(std::get<double>(a) - std::get<double>(b));
    return (std::get<Vec3>(a) - std::get<Vec3>(b)).max_abs();
}

} // namespace

ConvergenceReport converge(const SpectralField& field, const DispersionRelation& disp,
                           const std::string& observable, double t, double tol,
                           const ConvergeOptions& opts) {
    if (!(tol > 0.0)) throw DomainError("convergence tolerance must be > 0");
    if (opts.initial_points > opts.max_points)
        throw DomainError("initial grid resolution exceeds the resolution cap");
    const auto& names = observable_names();
    if (std::find(names.begin(), names.end(), observable) == names.end())
        throw ConfigError("unknown observable '" + observable + "'");

    ConvergenceReport report;
    int n = opts.initial_points;
    while (n <= opts.max_points) {
        const GridSpec spec = auto_grid(field, opts.margin, n);
        const MomentSums sums = accumulate_moments(field, disp, spec, t, opts.threads).sums;
        const ObservableValue value = extract_observable(sums, disp, observable, t);
        report.levels.emplace_back(spec, value);
        report.value = value;
        if (report.levels.size() >= 2) {
            report.error_estimate =
                value_diff(report.levels[report.levels.size() - 2].second, value);
            if (report.error_estimate < tol) {
                report.converged = true;
                return report;
            }
        }
        n = 2 * n - 1;
    }
    if (report.levels.size() < 2)
        report.error_estimate = std::numeric_limits<double>::infinity();
    report.converged = false;
    return report;
}

} // namespace wavekin
