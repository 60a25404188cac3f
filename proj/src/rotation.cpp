#include "vtm/rotation.hpp"

#include <cmath>

#include "vtm/errors.hpp"

namespace vtm {

namespace {

constexpr double kDegenerateNorm = 1e-12;

} // namespace

Rotation::Rotation(double w, double x, double y, double z) {
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (n < kDegenerateNorm) {
        throw DegenerateInput("quaternion norm below 1e-12");
    }
    w = w / n;
    x = x / n;
    y = y / n;
    z = z / n;
    // Canonical sign: w >= 0; on the w == 0 great circle pick the first
    // nonzero vector component positive so q and -q collapse to one value.
    bool flip = w < 0.0;
    if (w == 0.0) {
        if (x != 0.0) {
            flip = x < 0.0;
        } else if (y != 0.0) {
            flip = y < 0.0;
        } else {
            flip = z < 0.0;
        }
    }
    if (flip) {
        w = -w;
        x = -x;
        y = -y;
        z = -z;
    }
    w_ = w;
    x_ = x;
    y_ = y;
    z_ = z;
}

Rotation Rotation::from_matrix(const Mat3& m) {
    // Shepperd's method: branch on the largest diagonal combination.
    const double tr = m(0, 0) + m(1, 1) + m(2, 2);
    double w, x, y, z;
    if (tr > 0.0) {
        const double s = std::sqrt(tr + 1.0) * 2.0;
        w = 0.25 * s;
        x = (m(2, 1) - m(1, 2)) / s;
        y = (m(0, 2) - m(2, 0)) / s;
        z = (m(1, 0) - m(0, 1)) / s;
    } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
        const double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2.0;
        w = (m(2, 1) - m(1, 2)) / s;
        x = 0.25 * s;
        y = (m(0, 1) + m(1, 0)) / s;
        z = (m(0, 2) + m(2, 0)) / s;
    } else if (m(1, 1) > m(2, 2)) {
        const double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2.0;
        w = (m(0, 2) - m(2, 0)) / s;
        x = (m(0, 1) + m(1, 0)) / s;
        y = 0.25 * s;
        z = (m(1, 2) + m(2, 1)) / s;
    } else {
        const double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2.0;
        w = (m(1, 0) - m(0, 1)) / s;
        x = (m(0, 2) + m(2, 0)) / s;
        y = (m(1, 2) + m(2, 1)) / s;
        z = 0.25 * s;
    }
    return Rotation(w, x, y, z);
}

Rotation Rotation::about_axis(int axis, double radians) {
    const double h = 0.5 * radians;
    const double c = std::cos(h);
    const double s = std::sin(h);
    switch (axis) {
    case 0: return Rotation(c, s, 0.0, 0.0);
    case 1: return Rotation(c, 0.0, s, 0.0);
    case 2: return Rotation(c, 0.0, 0.0, s);
    default: throw DegenerateInput("rotation axis must be 0, 1 or 2");
    }
}

Rotation Rotation::from_axis_angle(const Vec3& axis, double radians) {
    const double n = axis.norm();
    if (n < kDegenerateNorm) {
        throw DegenerateInput("rotation axis norm below 1e-12");
    }
    const double h = 0.5 * radians;
    const Vec3 u = axis / n * std::sin(h);
    return Rotation(std::cos(h), u.x(), u.y(), u.z());
}

Mat3 Rotation::matrix() const {
    const double w = w_, x = x_, y = y_, z = z_;
    Mat3 m;
    m(0, 0) = 1.0 - 2.0 * (y * y + z * z);
    m(0, 1) = 2.0 * (x * y - w * z);
    m(0, 2) = 2.0 * (x * z + w * y);
    m(1, 0) = 2.0 * (x * y + w * z);
    m(1, 1) = 1.0 - 2.0 * (x * x + z * z);
    m(1, 2) = 2.0 * (y * z - w * x);
    m(2, 0) = 2.0 * (x * z - w * y);
    m(2, 1) = 2.0 * (y * z + w * x);
    m(2, 2) = 1.0 - 2.0 * (x * x + y * y);
    return m;
}

Rotation Rotation::operator*(const Rotation& r) const {
    return Rotation(
        w_ * r.w_ - x_ * r.x_ - y_ * r.y_ - z_ * r.z_,
        w_ * r.x_ + x_ * r.w_ + y_ * r.z_ - z_ * r.y_,
        w_ * r.y_ - x_ * r.z_ + y_ * r.w_ + z_ * r.x_,
        w_ * r.z_ + x_ * r.y_ - y_ * r.x_ + z_ * r.w_);
}

Vec3 Rotation::rotate(const Vec3& v) const {
    // v' = v + 2 * u x (u x v + w v), u = (x, y, z)
    const Vec3 u(x_, y_, z_);
    const Vec3 t = 2.0 * u.cross(v);
    return v + w_ * t + u.cross(t);
}

double geodesic_angle(const Rotation& a, const Rotation& b) {
    double dot = a.w() * b.w() + a.x() * b.x() + a.y() * b.y() + a.z() * b.z();
    const double sign = dot < 0.0 ? -1.0 : 1.0;
    const Eigen::Vector4d va(a.w(), a.x(), a.y(), a.z());
    const Eigen::Vector4d vb = sign * Eigen::Vector4d(b.w(), b.x(), b.y(), b.z());
    // |a - b| = 2 sin(theta/4), |a + b| = 2 cos(theta/4): stable near zero.
    return 4.0 * std::atan2((va - vb).norm(), (va + vb).norm());
}

Rot6d rot_to_6d(const Rotation& r) {
    const Mat3 m = r.matrix();
    Rot6d d;
    d.v = {m(0, 0), m(1, 0), m(2, 0), m(0, 1), m(1, 1), m(2, 1)};
    return d;
}

Rotation six_d_to_rot(const Rot6d& d) {
    Vec3 a(d[0], d[1], d[2]);
    Vec3 b(d[3], d[4], d[5]);
    const double na = a.norm();
    if (na < 1e-12) {
        throw DegenerateInput("6d rotation: first column norm below 1e-12");
    }
    a /= na;
    b -= a.dot(b) * a;
    const double nb = b.norm();
    if (nb < 1e-12) {
        throw DegenerateInput("6d rotation: second column collapses onto the first");
    }
    b /= nb;
    const Vec3 c = a.cross(b);
    Mat3 m;
    m.col(0) = a;
    m.col(1) = b;
    m.col(2) = c;
    return Rotation::from_matrix(m);
}

Rotation rotation_from_euler(const std::array<int, 3>& axes,
                             const std::array<double, 3>& angles) {
    return Rotation::about_axis(axes[0], angles[0]) *
           Rotation::about_axis(axes[1], angles[1]) *
           Rotation::about_axis(axes[2], angles[2]);
}

std::array<double, 3> euler_zxy_from_rotation(const Rotation& r) {
    // R = Rz * Rx * Ry with column vectors gives
    //   m21 = sin(x), m20 = -cos(x) sin(y), m22 = cos(x) cos(y),
    //   m01 = -sin(z) cos(x), m11 = cos(z) cos(x).
    const Mat3 m = r.matrix();
    const double sx = std::clamp(m(2, 1), -1.0, 1.0);
    const double x = std::asin(sx);
    double z, y;
    if (std::abs(sx) < 1.0 - 1e-12) {
        y = std::atan2(-m(2, 0), m(2, 2));
        z = std::atan2(-m(0, 1), m(1, 1));
    } else if (sx > 0.0) {
        // x = +90 deg: row 0 is [cos(z+y), 0, sin(z+y)], only z+y observable.
        z = 0.0;
        y = std::atan2(m(0, 2), m(0, 0));
    } else {
        // x = -90 deg: row 0 is [cos(z-y), 0, -sin(z-y)].
        z = 0.0;
        y = -std::atan2(-m(0, 2), m(0, 0));
    }
    return {z, x, y};
}

} // namespace vtm
