#pragma once

#include <cmath>
#include <complex>

namespace wavekin {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator/(Vec3 a, double s) { return a *= (1.0 / s); }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    constexpr double norm2() const { return x * x + y * y + z * z; }
    double max_abs() const { return std::max({std::fabs(x), std::fabs(y), std::fabs(z)}); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

using Complex = std::complex<double>;

// Complex-valued 3-vector, used for spectral gradients and raw centroid integrals.
struct CVec3 {
    Complex x{};
    Complex y{};
    Complex z{};

    CVec3() = default;
    CVec3(Complex x_, Complex y_, Complex z_) : x(x_), y(y_), z(z_) {}

    CVec3& operator+=(const CVec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    friend CVec3 operator+(CVec3 a, const CVec3& b) { return a += b; }
    friend CVec3 operator-(CVec3 a, const CVec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend CVec3 operator*(const CVec3& a, Complex s) { return {a.x * s, a.y * s, a.z * s}; }
    friend CVec3 operator*(Complex s, const CVec3& a) { return a * s; }
    friend CVec3 operator*(const CVec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }

    Vec3 real() const { return {x.real(), y.real(), z.real()}; }
    Vec3 imag() const { return {x.imag(), y.imag(), z.imag()}; }
    bool finite() const {
        return std::isfinite(x.real()) && std::isfinite(x.imag()) &&
               std::isfinite(y.real()) && std::isfinite(y.imag()) &&
               std::isfinite(z.real()) && std::isfinite(z.imag());
    }
};

} // namespace wavekin
