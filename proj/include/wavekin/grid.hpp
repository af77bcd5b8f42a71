#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "wavekin/errors.hpp"
#include "wavekin/vec3.hpp"

namespace wavekin {

// Axis-aligned box in momentum space with a uniform tensor-product node set.
// Nodes are indexed (ix, iy, iz) with the z index fastest in flat order.
struct GridSpec {
    Vec3 kmin;
    Vec3 kmax;
    std::array<int, 3> n{};

    GridSpec(Vec3 lo, Vec3 hi, std::array<int, 3> points) : kmin(lo), kmax(hi), n(points) {
        if (!kmin.finite() || !kmax.finite()) throw DomainError("grid corners must be finite");
        if (!(kmax.x > kmin.x && kmax.y > kmin.y && kmax.z > kmin.z))
            throw DomainError("grid box must have kmax > kmin on every axis");
        for (int a = 0; a < 3; ++a)
            if (n[a] < 8) throw DomainError("grid needs at least 8 points per axis");
    }

    double lo(int axis) const { return axis == 0 ? kmin.x : axis == 1 ? kmin.y : kmin.z; }
    double hi(int axis) const { return axis == 0 ? kmax.x : axis == 1 ? kmax.y : kmax.z; }
    double spacing(int axis) const { return (hi(axis) - lo(axis)) / (n[axis] - 1); }

    double coord(int axis, int i) const { return lo(axis) + spacing(axis) * i; }
    Vec3 node(int ix, int iy, int iz) const { return {coord(0, ix), coord(1, iy), coord(2, iz)}; }

    std::int64_t size() const {
        return static_cast<std::int64_t>(n[0]) * n[1] * n[2];
    }
    std::int64_t flat_index(int ix, int iy, int iz) const {
        return (static_cast<std::int64_t>(ix) * n[1] + iy) * n[2] + iz;
    }

    // Node-nested refinement: 2N-1 points per axis keeps every existing node.
    GridSpec refined() const {
        return {kmin, kmax, {2 * n[0] - 1, 2 * n[1] - 1, 2 * n[2] - 1}};
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

} // namespace wavekin
