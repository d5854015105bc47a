#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <stdexcept>

namespace pslam {

using Vector6d = Eigen::Matrix<double, 6, 1>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AngleNearPi : Error {
    AngleNearPi() : Error("rotation angle too close to pi for a stable log") {}
};
struct DegenerateNormal : Error {
    DegenerateNormal() : Error("plane normal has |nz| below the chart threshold") {}
};
struct NonPositiveDepth : Error {
    NonPositiveDepth() : Error("point depth must be positive") {}
};
struct BehindCamera : Error {
    BehindCamera() : Error("warped point falls behind the camera") {}
};

/// se(3) element split into translational and rotational parts.
struct Twist {
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    Eigen::Vector3d w = Eigen::Vector3d::Zero();

    Twist() = default;
    Twist(const Eigen::Vector3d& v_, const Eigen::Vector3d& w_) : v(v_), w(w_) {}
    explicit Twist(const Vector6d& x) : v(x.head<3>()), w(x.tail<3>()) {}

    Vector6d vec() const {
        Vector6d x;
        x << v, w;
        return x;
    }
    static Twist zero() { return Twist(); }
};

inline Twist operator+(const Twist& a, const Twist& b) { return {a.v + b.v, a.w + b.w}; }
inline Twist operator-(const Twist& a, const Twist& b) { return {a.v - b.v, a.w - b.w}; }
inline Twist operator*(double s, const Twist& a) { return {s * a.v, s * a.w}; }

/// SE(3) element as rotation matrix plus translation.
struct RigidTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    RigidTransform() = default;
    RigidTransform(const Eigen::Matrix3d& R, const Eigen::Vector3d& t)
        : rotation(R), translation(t) {}

    static RigidTransform identity() { return {}; }

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
    Eigen::Vector3d operator*(const Eigen::Vector3d& p) const { return apply(p); }

    RigidTransform operator*(const RigidTransform& o) const {
        return {rotation * o.rotation, rotation * o.translation + translation};
    }
    RigidTransform inverse() const {
        return {rotation.transpose(), -(rotation.transpose() * translation)};
    }

    // Frobenius departure from the SE(3) manifold (orthonormality + det).
    double orthonormality_error() const;
};

/// Plane in Hessian form: n.p + d = 0 for supporting points p, with ||n|| = 1.
struct Plane {
    Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
    double offset = 0.0;

    Plane() = default;
    Plane(const Eigen::Vector3d& n, double d) : normal(n), offset(d) {}

    double signed_distance(const Eigen::Vector3d& p) const { return normal.dot(p) + offset; }
};

struct Intrinsics {
    double fx = 0, fy = 0, cx = 0, cy = 0;
    int width = 0, height = 0;

    bool valid() const {
        return fx > 0 && fy > 0 && width > 0 && height > 0 && cx >= 0 && cx < width &&
               cy >= 0 && cy < height;
    }
};

Eigen::Matrix3d skew(const Eigen::Vector3d& w);

RigidTransform exp_twist(const Twist& xi);
Twist log_transform(const RigidTransform& T);

/// Maps a plane under the point transform p' = T p (covariant transform T^-T applied
/// to the homogeneous plane vector). Normal is renormalized.
Plane transform_plane(const RigidTransform& T, const Plane& plane);

/// Minimal 3-parameter plane coordinates [atan(nx/nz), atan(ny/nz), d].
/// Throws DegenerateNormal when |nz| <= 1e-6.
Eigen::Vector3d plane_qparam(const Plane& plane);

/// Chart axis for the minimal parametrization: the normal component used as the
/// arctangent denominator. Z is the chart of plane_qparam().
enum class QChart { X = 0, Y = 1, Z = 2 };

/// Chart picked by the largest |normal| component; keeps the residual smooth
/// when nz degenerates.
QChart stable_qchart(const Plane& plane);
Eigen::Vector3d plane_qparam(const Plane& plane, QChart chart);

/// d(qparam)/d(n, d) as a 3x4 matrix, for the chosen chart.
Eigen::Matrix<double, 3, 4> plane_qparam_jacobian(const Plane& plane, QChart chart);

Eigen::Vector2d project(const Intrinsics& K, const Eigen::Vector3d& p);
Eigen::Vector3d backproject(const Intrinsics& K, const Eigen::Vector2d& u, double z);

/// Warps a current-frame pixel with depth z into the frame reached by exp(xi).
Eigen::Vector2d warp_pixel(const Intrinsics& K, const Eigen::Vector2d& u, double z,
                           const Twist& xi);

/// Intrinsics of the next-coarser pyramid level (half resolution, pixel-center exact).
Intrinsics halve_intrinsics(const Intrinsics& K);

/// Least-squares rigid transform with to[i] ~= T * from[i] (SVD orthogonal Procrustes).
RigidTransform rigid_align(const std::vector<Eigen::Vector3d>& from,
                           const std::vector<Eigen::Vector3d>& to);

}  // namespace pslam
