#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "wavekin/errors.hpp"
#include "wavekin/field.hpp"
#include "wavekin/grid.hpp"
#include "wavekin/vec3.hpp"

namespace wavekin {

// Worker count used when integrate() is called with threads = 0.
// 0 means hardware concurrency. Results never depend on this setting.
int default_threads();
void set_default_threads(int n);

inline bool all_finite(double v) { return std::isfinite(v); }
inline bool all_finite(const Complex& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }
inline bool all_finite(const Vec3& v) { return v.finite(); }
inline bool all_finite(const CVec3& v) { return v.finite(); }

namespace detail {

// Fixed-shape pairwise tree over a contiguous range. The split point depends
// only on the length, so the rounding pattern is reproducible.
template <class T>
T pairwise_sum(const T* v, std::int64_t n) {
    if (n == 1) return v[0];
    if (n == 2) return v[0] + v[1];
    const std::int64_t m = n / 2;
    return pairwise_sum(v, m) + pairwise_sum(v + m, n - m);
}

// Nodes are reduced in blocks of fixed size; block boundaries depend only on
// the grid, never on the worker count, so parallel runs are bit-identical.
inline constexpr std::int64_t kReductionBlock = 4096;

} // namespace detail

// Trapezoidal tensor-product quadrature of f over the grid box.
// f is called as f(ix, iy, iz, k) and may return double, Complex, Vec3, CVec3,
// or any value type with operator+, operator*(double) and an all_finite
// overload. Evaluation may happen on several threads; f must be pure.
template <class F>
auto integrate(const GridSpec& spec, F&& f, int threads = 0)
    -> std::invoke_result_t<F&, int, int, int, const Vec3&> {
    using T = std::invoke_result_t<F&, int, int, int, const Vec3&>;

    std::vector<double> w[3];
    for (int a = 0; a < 3; ++a) {
        const double h = spec.spacing(a);
        w[a].resize(spec.n[a], h);
        w[a].front() = 0.5 * h;
        w[a].back() = 0.5 * h;
    }

    const std::int64_t size = spec.size();
    const std::int64_t nblocks = (size + detail::kReductionBlock - 1) / detail::kReductionBlock;
    std::vector<T> block_sums(static_cast<std::size_t>(nblocks));

    std::atomic<std::int64_t> next_block{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto run_block = [&](std::int64_t b, std::vector<T>& scratch) {
        const std::int64_t begin = b * detail::kReductionBlock;
        const std::int64_t end = std::min(size, begin + detail::kReductionBlock);
        scratch.clear();

        int iz = static_cast<int>(begin % spec.n[2]);
        int iy = static_cast<int>((begin / spec.n[2]) % spec.n[1]);
        int ix = static_cast<int>(begin / (static_cast<std::int64_t>(spec.n[2]) * spec.n[1]));
        for (std::int64_t flat = begin; flat < end; ++flat) {
            const Vec3 k = spec.node(ix, iy, iz);
            T value = f(ix, iy, iz, k);
            if (!all_finite(value)) {
                std::ostringstream msg;
                msg << "integrand is non-finite at node (" << ix << ", " << iy << ", " << iz
                    << "), k = (" << k.x << ", " << k.y << ", " << k.z << ")";
                throw NumericalConsistencyError(msg.str());
            }
            scratch.push_back(value * (w[0][ix] * w[1][iy] * w[2][iz]));
            if (++iz == spec.n[2]) {
                iz = 0;
                if (++iy == spec.n[1]) {
                    iy = 0;
                    ++ix;
                }
            }
        }
        block_sums[static_cast<std::size_t>(b)] =
            detail::pairwise_sum(scratch.data(), end - begin);
    };

    auto worker = [&]() {
        std::vector<T> scratch;
        scratch.reserve(detail::kReductionBlock);
        try {
            while (!failed.load(std::memory_order_relaxed)) {
                const std::int64_t b = next_block.fetch_add(1);
                if (b >= nblocks) break;
                run_block(b, scratch);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            failed.store(true, std::memory_order_relaxed);
        }
    };

    int n_threads = threads > 0 ? threads : default_threads();
    if (n_threads <= 0) n_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads <= 0) n_threads = 1;
    n_threads = static_cast<int>(std::min<std::int64_t>(n_threads, nblocks));

    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    return detail::pairwise_sum(block_sums.data(), nblocks);
}

// Bounding box of all component centers, expanded by margin * width per
// component per axis. Guarantees the boundary-decay containment that the
// expectation-value identities rely on; margin below 4 is rejected.
GridSpec auto_grid(const SpectralField& field, double margin, int points_per_axis);

} // namespace wavekin
