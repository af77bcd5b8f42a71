#pragma once

#include <functional>

#include "wavekin/vec3.hpp"

namespace wavekin {

// Isotropic dispersion relation omega(|k|) with analytic radial derivative.
// hbar = 1 throughout: momentum p is the wavevector k, energy E is the
// frequency omega. Immutable after construction; all methods are pure and
// safe to call from many threads.
class DispersionRelation {
  public:
    enum class Kind { Quadratic, RelativisticMassive, Massless, CustomIsotropic };

    // omega = kappa^2 / 2m. c only enters the boost-momentum formula, which is
    // still well-defined (though not conserved) for this kind.
    static DispersionRelation quadratic(double m, double c = 1.0);
    // omega = sqrt(kappa^2 c^2 + m^2 c^4); m = 0 allowed
    static DispersionRelation relativistic(double m, double c);
    // omega = kappa c
    static DispersionRelation massless(double c);
    // User-supplied radial law. The derivative is validated against central
    // finite differences of omega at 100 log-spaced kappa in
    // [kappa_lo, kappa_hi] (relative error < 1e-6 required).
    static DispersionRelation custom(std::function<double(double)> omega,
                                     std::function<double(double)> domega,
                                     double kappa_lo, double kappa_hi, double c = 1.0);

    Kind kind() const { return kind_; }
    double mass() const { return m_; }
    double light_speed() const { return c_; }
    // Massless and RelativisticMassive obey omega >= kappa*c and |v_g| <= c.
    bool relativistic_kind() const {
        return kind_ == Kind::Massless || kind_ == Kind::RelativisticMassive;
    }

    double omega_radial(double kappa) const;
    double domega_radial(double kappa) const;

    double omega(const Vec3& k) const;

    // grad_k omega = omega'(|k|) * k/|k|. Throws SingularityError for the
    // massless kind at k = 0 where the direction is undefined; quadrature
    // kernels regularize that single node instead of calling this.
    Vec3 group_velocity(const Vec3& k) const;

  private:
    DispersionRelation() = default;

    Kind kind_ = Kind::Quadratic;
    double m_ = 0.0;
    double c_ = 0.0;
    std::function<double(double)> custom_omega_;
    std::function<double(double)> custom_domega_;
};

} // namespace wavekin
