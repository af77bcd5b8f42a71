#pragma once

#include <optional>
#include <vector>

#include "wavekin/dispersion.hpp"
#include "wavekin/grid.hpp"
#include "wavekin/vec3.hpp"

namespace wavekin {

// One Gaussian packet in momentum space. The stored profile is L2-normalized,
//   A * (pi Delta^2)^(-3/4) * exp(-(k-k0)^2 / (2 Delta^2)) * exp(-i k.r0),
// so the packet contributes exactly |A|^2 to the total norm and r0 shifts the
// packet's position-space centroid without touching |psi|.
struct GaussianComponent {
    Complex amplitude;
    Vec3 center;
    double width = 0.0;
    Vec3 offset;
};

// Scalar wavefunction in momentum space at t = 0, evolved in free space by the
// exact phase e^{-i omega t}. Either an analytic Gaussian superposition or a
// sampled grid. Immutable; evaluation is pure and thread-safe.
class SpectralField {
  public:
    static SpectralField gaussians(std::vector<GaussianComponent> components);
    // Samples are flat in GridSpec order (z fastest). Rejects fields whose
    // boundary-face amplitude exceeds 1e-8 of the peak (the packet must be
    // fully contained for the integration-by-parts identities to hold).
    static SpectralField grid(GridSpec spec, std::vector<Complex> samples);

    bool is_gaussian() const { return !components_.empty(); }
    const std::vector<GaussianComponent>& components() const;
    const GridSpec& grid_spec() const;
    const std::vector<Complex>& samples() const;

    // psi(k) e^{-i omega(|k|) t}. For grid fields k must coincide with a node.
    Complex amplitude_at(const DispersionRelation& disp, const Vec3& k, double t) const;

    // grad_k of the evolved amplitude via the exact factorization
    //   grad(psi e^{-i omega t}) = e^{-i omega t} (grad psi - i t (grad omega) psi).
    // Gaussian components use the closed-form gradient; grid fields use a
    // 4th-order central stencil on the t = 0 samples (interior nodes only).
    CVec3 spectral_gradient(const DispersionRelation& disp, const Vec3& k, double t) const;

    // t = 0 building blocks (no dispersion involved).
    Complex amplitude0(const Vec3& k) const;
    CVec3 gradient0(const Vec3& k) const;

    // Resolves k to node indices for grid fields; UsageError when off-node.
    std::array<int, 3> locate_node(const Vec3& k) const;

  private:
    SpectralField() = default;

    std::vector<GaussianComponent> components_;
    std::optional<GridSpec> spec_;
    std::vector<Complex> samples_;
};

} // namespace wavekin
