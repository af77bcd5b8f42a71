#include "wavekin/field.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "wavekin/errors.hpp"

namespace wavekin {

namespace {

double component_prefactor(const GaussianComponent& g) {
    return std::pow(std::numbers::pi * g.width * g.width, -0.75);
}

Complex gaussian_value(const GaussianComponent& g, const Vec3& k) {
    const Vec3 d = k - g.center;
    const double envelope = component_prefactor(g) * std::exp(-d.norm2() / (2.0 * g.width * g.width));
    const double phase = -dot(k, g.offset);
    return g.amplitude * std::polar(envelope, phase);
}

} // namespace

SpectralField SpectralField::gaussians(std::vector<GaussianComponent> components) {
    if (components.empty()) throw ConfigError("field needs at least one Gaussian component");
    bool any_nonzero = false;
    for (const auto& g : components) {
        if (!(g.width > 0.0) || !std::isfinite(g.width))
            throw ConfigError("Gaussian component width must be > 0 and finite");
        if (!std::isfinite(g.amplitude.real()) || !std::isfinite(g.amplitude.imag()) ||
            !g.center.finite() || !g.offset.finite())
            throw ConfigError("Gaussian component parameters must be finite");
        if (std::abs(g.amplitude) > 0.0) any_nonzero = true;
    }
    if (!any_nonzero) throw DegenerateFieldError("all component amplitudes vanish");

    SpectralField f;
    f.components_ = std::move(components);
    return f;
}

SpectralField SpectralField::grid(GridSpec spec, std::vector<Complex> samples) {
    if (static_cast<std::int64_t>(samples.size()) != spec.size())
        throw ConfigError("grid sample count does not match the grid spec");

    double peak = 0.0;
    for (const auto& s : samples) {
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw ConfigError("grid samples must be finite");
        peak = std::max(peak, std::abs(s));
    }
    if (peak <= 0.0) throw DegenerateFieldError("grid field is identically zero");

    double face_peak = 0.0;
    for (int ix = 0; ix < spec.n[0]; ++ix)
        for (int iy = 0; iy < spec.n[1]; ++iy)
            for (int iz = 0; iz < spec.n[2]; ++iz) {
                const bool on_face = ix == 0 || ix == spec.n[0] - 1 || iy == 0 ||
                                     iy == spec.n[1] - 1 || iz == 0 || iz == spec.n[2] - 1;
                if (on_face)
                    face_peak = std::max(face_peak, std::abs(samples[spec.flat_index(ix, iy, iz)]));
            }
    if (!(face_peak < 1e-8 * peak)) {
        std::ostringstream msg;
        msg << "grid field is not contained in its box: boundary amplitude " << face_peak
            << " exceeds 1e-8 of the peak " << peak;
        throw ConfigError(msg.str());
    }

    // Total norm > 0 is implied by peak > 0; still reject a norm that would
    // underflow every expectation value.
    double norm = 0.0;
    for (const auto& s : samples) norm += std::norm(s);
    norm *= spec.spacing(0) * spec.spacing(1) * spec.spacing(2);
    if (!(norm > 1e-300) || !std::isfinite(norm))
        throw DegenerateFieldError("grid field norm is degenerate");

    SpectralField f;
    f.spec_ = spec;
    f.samples_ = std::move(samples);
    return f;
}

const std::vector<GaussianComponent>& SpectralField::components() const {
    if (!is_gaussian()) throw UsageError("field is not a Gaussian superposition");
    return components_;
}

const GridSpec& SpectralField::grid_spec() const {
    if (is_gaussian()) throw UsageError("field is not grid-sampled");
    return *spec_;
}

const std::vector<Complex>& SpectralField::samples() const {
    if (is_gaussian()) throw UsageError("field is not grid-sampled");
    return samples_;
}

std::array<int, 3> SpectralField::locate_node(const Vec3& k) const {
    const GridSpec& spec = grid_spec();
    std::array<int, 3> idx{};
    const double coords[3] = {k.x, k.y, k.z};
    for (int a = 0; a < 3; ++a) {
        const double h = spec.spacing(a);
        const double pos = (coords[a] - spec.lo(a)) / h;
        const int i = static_cast<int>(std::lround(pos));
        if (i < 0 || i >= spec.n[a] || std::fabs(coords[a] - spec.coord(a, i)) > 1e-9 * h) {
            std::ostringstream msg;
            msg << "k = (" << k.x << ", " << k.y << ", " << k.z
                << ") is not a grid node (no interpolation is offered)";
            throw UsageError(msg.str());
        }
        idx[a] = i;
    }
    return idx;
}

Complex SpectralField::amplitude0(const Vec3& k) const {
    if (!k.finite()) throw DomainError("field: non-finite wavevector");
    if (is_gaussian()) {
        Complex sum = 0.0;
        for (const auto& g : components_) sum += gaussian_value(g, k);
        return sum;
    }
    const auto idx = locate_node(k);
    return samples_[spec_->flat_index(idx[0], idx[1], idx[2])];
}

CVec3 SpectralField::gradient0(const Vec3& k) const {
    if (!k.finite()) throw DomainError("field: non-finite wavevector");
    if (is_gaussian()) {
        CVec3 sum;
        for (const auto& g : components_) {
            const Complex v = gaussian_value(g, k);
            // grad psi_j = (-(k - k0)/Delta^2 - i r0) psi_j
            const Vec3 d = (k - g.center) * (-1.0 / (g.width * g.width));
            sum += CVec3{Complex(d.x, -g.offset.x), Complex(d.y, -g.offset.y),
                         Complex(d.z, -g.offset.z)} *
                   v;
        }
        return sum;
    }

    const GridSpec& spec = *spec_;
    const auto idx = locate_node(k);
    for (int a = 0; a < 3; ++a)
        if (idx[a] < 2 || idx[a] > spec.n[a] - 3)
            throw UsageError("spectral gradient stencil unavailable at a boundary node");

    auto sample = [&](int ix, int iy, int iz) { return samples_[spec.flat_index(ix, iy, iz)]; };
    const int ix = idx[0], iy = idx[1], iz = idx[2];
    auto deriv = [](Complex m2, Complex m1, Complex p1, Complex p2, double h) {
        return (m2 - p2 + 8.0 * (p1 - m1)) / (12.0 * h);
    };
    return {deriv(sample(ix - 2, iy, iz), sample(ix - 1, iy, iz), sample(ix + 1, iy, iz),
                  sample(ix + 2, iy, iz), spec.spacing(0)),
            deriv(sample(ix, iy - 2, iz), sample(ix, iy - 1, iz), sample(ix, iy + 1, iz),
                  sample(ix, iy + 2, iz), spec.spacing(1)),
            deriv(sample(ix, iy, iz - 2), sample(ix, iy, iz - 1), sample(ix, iy, iz + 1),
                  sample(ix, iy, iz + 2), spec.spacing(2))};
}

Complex SpectralField::amplitude_at(const DispersionRelation& disp, const Vec3& k, double t) const {
    const Complex value = amplitude0(k);
    if (t == 0.0) return value;
    return value * std::polar(1.0, -disp.omega(k) * t);
}

CVec3 SpectralField::spectral_gradient(const DispersionRelation& disp, const Vec3& k, double t) const {
    CVec3 grad = gradient0(k);
    if (t == 0.0) return grad;
    const Complex value = amplitude0(k);
    const Vec3 vg = disp.group_velocity(k);
    const Complex it(0.0, t);
    grad = grad + CVec3{vg.x * value, vg.y * value, vg.z * value} * (-it);
    const Complex phase = std::polar(1.0, -disp.omega(k) * t);
    return grad * phase;
}

} // namespace wavekin
