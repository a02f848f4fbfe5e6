#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace gsvq {

using Vec3 = std::array<double, 3>;

// Row-major 3x3.
struct Mat3 {
    std::array<double, 9> m{};

    double& operator()(int r, int c) { return m[static_cast<std::size_t>(r) * 3 + c]; }
    double operator()(int r, int c) const { return m[static_cast<std::size_t>(r) * 3 + c]; }

    static Mat3 identity() {
        Mat3 out;
        out(0, 0) = out(1, 1) = out(2, 2) = 1.0;
        return out;
    }
};

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 out;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a(r, k) * b(k, c);
            out(r, c) = s;
        }
    return out;
}

inline Vec3 operator*(const Mat3& a, const Vec3& v) {
    Vec3 out{};
    for (int r = 0; r < 3; ++r)
        out[r] = a(r, 0) * v[0] + a(r, 1) * v[1] + a(r, 2) * v[2];
    return out;
}

inline Mat3 transpose(const Mat3& a) {
    Mat3 out;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out(r, c) = a(c, r);
    return out;
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 normalized(const Vec3& a) {
    const double n = norm(a);
    return {a[0] / n, a[1] / n, a[2] / n};
}

} // namespace gsvq
