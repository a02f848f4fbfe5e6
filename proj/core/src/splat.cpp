#include "gsvq/splat.hpp"

#include <cmath>

#include "gsvq/errors.hpp"

namespace gsvq {

Mat3 quaternion_to_matrix(const std::array<float, 4>& q) {
    const double w0 = q[0], x0 = q[1], y0 = q[2], z0 = q[3];
    const double n = std::sqrt(w0 * w0 + x0 * x0 + y0 * y0 + z0 * z0);
    if (n == 0.0) throw NumericError("zero quaternion cannot be normalized");
    const double w = w0 / n, x = x0 / n, y = y0 / n, z = z0 / n;

    Mat3 r;
    r(0, 0) = 1.0 - 2.0 * (y * y + z * z);
    r(0, 1) = 2.0 * (x * y - w * z);
    r(0, 2) = 2.0 * (x * z + w * y);
    r(1, 0) = 2.0 * (x * y + w * z);
    r(1, 1) = 1.0 - 2.0 * (x * x + z * z);
    r(1, 2) = 2.0 * (y * z - w * x);
    r(2, 0) = 2.0 * (x * z - w * y);
    r(2, 1) = 2.0 * (y * z + w * x);
    r(2, 2) = 1.0 - 2.0 * (x * x + y * y);
    return r;
}

Mat3 covariance3d(const std::array<float, 3>& scale_raw, const std::array<float, 4>& rotation) {
    const Mat3 r = quaternion_to_matrix(rotation);
    const double s0 = std::exp(static_cast<double>(scale_raw[0]));
    const double s1 = std::exp(static_cast<double>(scale_raw[1]));
    const double s2 = std::exp(static_cast<double>(scale_raw[2]));

    // R * diag(s^2) * R^T, symmetrized against rounding.
    Mat3 rs;
    for (int row = 0; row < 3; ++row) {
        rs(row, 0) = r(row, 0) * s0 * s0;
        rs(row, 1) = r(row, 1) * s1 * s1;
        rs(row, 2) = r(row, 2) * s2 * s2;
    }
    Mat3 sigma = rs * transpose(r);
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
            const double v = 0.5 * (sigma(a, b) + sigma(b, a));
            sigma(a, b) = v;
            sigma(b, a) = v;
        }
    return sigma;
}

ActivatedSplat activate(const GaussianSplat& splat) {
    const double w = splat.rotation[0], x = splat.rotation[1];
    const double y = splat.rotation[2], z = splat.rotation[3];
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (n == 0.0) throw NumericError("zero quaternion cannot be normalized");

    ActivatedSplat out;
    out.position = splat.position;
    out.opacity = sigmoid(splat.opacity_raw);
    for (int i = 0; i < 3; ++i) out.scale[i] = std::exp(splat.scale_raw[i]);
    out.rotation = {static_cast<float>(w / n), static_cast<float>(x / n),
                    static_cast<float>(y / n), static_cast<float>(z / n)};
    out.color_dc = splat.color_dc;
    out.sh_rest = splat.sh_rest;
    return out;
}

} // namespace gsvq
