#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace vtm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Unit quaternion in (w, x, y, z) order, kept normalized with w >= 0 so every
// rotation has exactly one representation. Construction normalizes and
// canonicalizes; inputs with near-zero norm are rejected.
class Rotation {
public:
    Rotation() : w_(1.0), x_(0.0), y_(0.0), z_(0.0) {}
    Rotation(double w, double x, double y, double z);

    static Rotation identity() { return Rotation(); }
    static Rotation from_matrix(const Mat3& m);
    // axis: 0 = X, 1 = Y, 2 = Z
    static Rotation about_axis(int axis, double radians);
    static Rotation from_axis_angle(const Vec3& axis, double radians);

    double w() const { return w_; }
    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }

    Mat3 matrix() const;
    Rotation inverse() const { return Rotation(w_, -x_, -y_, -z_); }
    Rotation operator*(const Rotation& rhs) const;
    Vec3 rotate(const Vec3& v) const;

    bool operator==(const Rotation& rhs) const {
        return w_ == rhs.w_ && x_ == rhs.x_ && y_ == rhs.y_ && z_ == rhs.z_;
    }

private:
    double w_, x_, y_, z_;
};

// Angle of the relative rotation between a and b, in radians. Computed from
// quaternion chords so values far below 1e-9 are still resolved.
double geodesic_angle(const Rotation& a, const Rotation& b);

// First two columns of the rotation matrix, column-major:
// (m00, m10, m20, m01, m11, m21). Identity is (1, 0, 0, 0, 1, 0).
struct Rot6d {
    std::array<double, 6> v{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

    double operator[](int i) const { return v[static_cast<size_t>(i)]; }
    double& operator[](int i) { return v[static_cast<size_t>(i)]; }
};

Rot6d rot_to_6d(const Rotation& r);

// Gram-Schmidt recovery: normalize the first column, orthogonalize the second
// against it, complete with the cross product. Throws DegenerateInput when a
// column collapses (norm < 1e-12 before/after orthogonalization).
Rotation six_d_to_rot(const Rot6d& d);

// Intrinsic Euler composition: rotations applied about the axes in the order
// given, each about the current local axis (BVH channel semantics), i.e.
// R = R(axes[0], a0) * R(axes[1], a1) * R(axes[2], a2) for column vectors.
Rotation rotation_from_euler(const std::array<int, 3>& axes,
                             const std::array<double, 3>& angles);

// Decompose into intrinsic Z-X-Y angles (radians) such that
// rotation_from_euler({2,0,1}, {z,x,y}) reproduces the rotation.
std::array<double, 3> euler_zxy_from_rotation(const Rotation& r);

} // namespace vtm
