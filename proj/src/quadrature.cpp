#include "wavekin/quadrature.hpp"

#include <atomic>

namespace wavekin {

namespace {
std::atomic<int> g_default_threads{0};
}

int default_threads() { return g_default_threads.load(); }

void set_default_threads(int n) { g_default_threads.store(n < 0 ? 0 : n); }

GridSpec auto_grid(const SpectralField& field, double margin, int points_per_axis) {
    if (!field.is_gaussian())
        throw UsageError("auto_grid needs an analytic field; grid-sampled fields carry their own box");
    if (!(margin >= 4.0))
        throw DomainError("grid margin below 4 widths does not guarantee boundary decay");

    const auto& comps = field.components();
    Vec3 lo = comps.front().center, hi = comps.front().center;
    for (const auto& g : comps) {
        const double pad = margin * g.width;
        lo.x = std::min(lo.x, g.center.x - pad);
        lo.y = std::min(lo.y, g.center.y - pad);
        lo.z = std::min(lo.z, g.center.z - pad);
        hi.x = std::max(hi.x, g.center.x + pad);
        hi.y = std::max(hi.y, g.center.y + pad);
        hi.z = std::max(hi.z, g.center.z + pad);
    }
    return {lo, hi, {points_per_axis, points_per_axis, points_per_axis}};
}

} // namespace wavekin
