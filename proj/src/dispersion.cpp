#include "wavekin/dispersion.hpp"

#include <cmath>
#include <sstream>

#include "wavekin/errors.hpp"

namespace wavekin {

namespace {

void require_finite(const Vec3& k) {
    if (!k.finite()) throw DomainError("dispersion: non-finite wavevector component");
}

} // namespace

DispersionRelation DispersionRelation::quadratic(double m, double c) {
    if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("quadratic dispersion requires mass m > 0");
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("light speed must be > 0");
    DispersionRelation d;
    d.kind_ = Kind::Quadratic;
    d.m_ = m;
    d.c_ = c;
    return d;
}

DispersionRelation DispersionRelation::relativistic(double m, double c) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw DomainError("relativistic dispersion requires mass m >= 0");
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("relativistic dispersion requires light speed c > 0");
    DispersionRelation d;
    d.kind_ = Kind::RelativisticMassive;
    d.m_ = m;
    d.c_ = c;
    return d;
}

DispersionRelation DispersionRelation::massless(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("massless dispersion requires light speed c > 0");
    DispersionRelation d;
    d.kind_ = Kind::Massless;
    d.c_ = c;
    return d;
}

DispersionRelation DispersionRelation::custom(std::function<double(double)> omega,
                                              std::function<double(double)> domega,
                                              double kappa_lo, double kappa_hi, double c) {
    if (!omega || !domega) throw DomainError("custom dispersion requires both omega and its derivative");
    if (!(kappa_lo > 0.0) || !(kappa_hi > kappa_lo) || !std::isfinite(kappa_hi))
        throw DomainError("custom dispersion validation range must satisfy 0 < kappa_lo < kappa_hi");
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("light speed must be > 0");

    constexpr int n_samples = 100;
    const double log_lo = std::log(kappa_lo);
    const double log_hi = std::log(kappa_hi);
    for (int i = 0; i < n_samples; ++i) {
        const double kappa = std::exp(log_lo + (log_hi - log_lo) * i / (n_samples - 1));
        if (!(omega(kappa) > 0.0))
            throw DomainError("custom dispersion must have omega > 0 for kappa > 0");
        const double h = 1e-6 * kappa;
        const double fd = (omega(kappa + h) - omega(kappa - h)) / (2.0 * h);
        const double given = domega(kappa);
        const double rel = std::fabs(given - fd) / std::max(std::fabs(given), 1e-12);
        if (!(rel < 1e-6)) {
            std::ostringstream msg;
            msg << "custom dispersion derivative disagrees with finite differences at kappa="
                << kappa << " (supplied " << given << ", fd " << fd << ", relative error " << rel << ")";
            throw DomainError(msg.str());
        }
    }

    DispersionRelation d;
    d.kind_ = Kind::CustomIsotropic;
    d.custom_omega_ = std::move(omega);
    d.custom_domega_ = std::move(domega);
    d.c_ = c;
    return d;
}

double DispersionRelation::omega_radial(double kappa) const {
    switch (kind_) {
        case Kind::Quadratic:
            return kappa * kappa / (2.0 * m_);
        case Kind::RelativisticMassive: {
            const double kc = kappa * c_;
            const double mc2 = m_ * c_ * c_;
            return std::sqrt(kc * kc + mc2 * mc2);
        }
        case Kind::Massless:
            return kappa * c_;
        case Kind::CustomIsotropic:
            return custom_omega_(kappa);
    }
    return 0.0; // unreachable
}

double DispersionRelation::domega_radial(double kappa) const {
    switch (kind_) {
        case Kind::Quadratic:
            return kappa / m_;
        case Kind::RelativisticMassive:
            return c_ * c_ * kappa / omega_radial(kappa);
        case Kind::Massless:
            return c_;
        case Kind::CustomIsotropic:
            return custom_domega_(kappa);
    }
    return 0.0; // unreachable
}

double DispersionRelation::omega(const Vec3& k) const {
    require_finite(k);
    return omega_radial(k.norm());
}

Vec3 DispersionRelation::group_velocity(const Vec3& k) const {
    require_finite(k);
    const double kappa = k.norm();
    if (kappa == 0.0) {
        switch (kind_) {
            case Kind::Quadratic:
                return {0.0, 0.0, 0.0};
            case Kind::RelativisticMassive:
                if (m_ > 0.0) return {0.0, 0.0, 0.0};
                [[fallthrough]]; // m = 0 is the massless law
            case Kind::Massless:
                throw SingularityError("group velocity direction undefined at k = 0 for massless dispersion");
            case Kind::CustomIsotropic:
                throw SingularityError("group velocity direction undefined at k = 0 for custom dispersion");
        }
    }
    return k * (domega_radial(kappa) / kappa);
}

} // namespace wavekin
