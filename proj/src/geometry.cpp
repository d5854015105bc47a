#include "pslam/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace pslam {

namespace {
constexpr double kSmallAngle = 1e-4;  // below this, series expansions
}

Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
    Eigen::Matrix3d W;
    W << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
    return W;
}

double RigidTransform::orthonormality_error() const {
    const Eigen::Matrix3d E = rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
    return E.norm() + std::abs(rotation.determinant() - 1.0);
}

RigidTransform exp_twist(const Twist& xi) {
    const double theta = xi.w.norm();
    const Eigen::Matrix3d W = skew(xi.w);
    const Eigen::Matrix3d W2 = W * W;
    double a, b, c;  // sin t / t, (1 - cos t) / t^2, (t - sin t) / t^3
    if (theta < kSmallAngle) {
        const double t2 = theta * theta;
        a = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
        b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
        c = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
    } else {
        a = std::sin(theta) / theta;
        b = (1.0 - std::cos(theta)) / (theta * theta);
        c = (theta - std::sin(theta)) / (theta * theta * theta);
    }
    RigidTransform T;
    T.rotation = Eigen::Matrix3d::Identity() + a * W + b * W2;
    const Eigen::Matrix3d V = Eigen::Matrix3d::Identity() + b * W + c * W2;
    T.translation = V * xi.v;
    return T;
}

Twist log_transform(const RigidTransform& T) {
    const Eigen::Matrix3d& R = T.rotation;
    const double trace = R.trace();
    if (trace <= -1.0 + 1e-6) throw AngleNearPi();

    const double cos_theta = std::min(1.0, std::max(-1.0, (trace - 1.0) * 0.5));
    const double theta = std::acos(cos_theta);

    Eigen::Vector3d vee(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
    vee *= 0.5;  // = sin(theta) * axis

    Twist xi;
    double half_over_sin;  // theta / (2 sin theta) without the 1/2 folded into vee
    if (theta < kSmallAngle) {
        const double t2 = theta * theta;
        half_over_sin = 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0;
    } else {
        half_over_sin = theta / std::sin(theta);
    }
    xi.w = half_over_sin * vee;

    const Eigen::Matrix3d W = skew(xi.w);
    double beta;  // coefficient of W^2 in V^-1
    if (theta < kSmallAngle) {
        const double t2 = theta * theta;
        beta = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
    } else {
        beta = (1.0 - theta * std::sin(theta) / (2.0 * (1.0 - std::cos(theta)))) / (theta * theta);
    }
    const Eigen::Matrix3d Vinv = Eigen::Matrix3d::Identity() - 0.5 * W + beta * W * W;
    xi.v = Vinv * T.translation;
    return xi;
}

Plane transform_plane(const RigidTransform& T, const Plane& plane) {
    Eigen::Vector3d n = T.rotation * plane.normal;
    double d = plane.offset - T.translation.dot(n);
    const double s = n.norm();
    n /= s;
    d /= s;
    return Plane(n, d);
}

QChart stable_qchart(const Plane& plane) {
    const Eigen::Vector3d a = plane.normal.cwiseAbs();
    if (a.z() >= a.x() && a.z() >= a.y()) return QChart::Z;
    if (a.y() >= a.x()) return QChart::Y;
    return QChart::X;
}

namespace {
// Chart axes: denominator component k, numerator components (i, j).
void chart_axes(QChart chart, int& i, int& j, int& k) {
    switch (chart) {
        case QChart::Z: i = 0; j = 1; k = 2; break;
        case QChart::Y: i = 0; j = 2; k = 1; break;
        case QChart::X: i = 1; j = 2; k = 0; break;
    }
}
}  // namespace

Eigen::Vector3d plane_qparam(const Plane& plane, QChart chart) {
    int i, j, k;
    chart_axes(chart, i, j, k);
    const Eigen::Vector3d& n = plane.normal;
    if (std::abs(n[k]) <= 1e-6) throw DegenerateNormal();
    return {std::atan(n[i] / n[k]), std::atan(n[j] / n[k]), plane.offset};
}

Eigen::Vector3d plane_qparam(const Plane& plane) { return plane_qparam(plane, QChart::Z); }

Eigen::Matrix<double, 3, 4> plane_qparam_jacobian(const Plane& plane, QChart chart) {
    int i, j, k;
    chart_axes(chart, i, j, k);
    const Eigen::Vector3d& n = plane.normal;
    Eigen::Matrix<double, 3, 4> J = Eigen::Matrix<double, 3, 4>::Zero();
    const double s1 = n[i] * n[i] + n[k] * n[k];
    const double s2 = n[j] * n[j] + n[k] * n[k];
    J(0, i) = n[k] / s1;
    J(0, k) = -n[i] / s1;
    J(1, j) = n[k] / s2;
    J(1, k) = -n[j] / s2;
    J(2, 3) = 1.0;
    return J;
}

Eigen::Vector2d project(const Intrinsics& K, const Eigen::Vector3d& p) {
    if (p.z() <= 0.0) throw NonPositiveDepth();
    return {K.fx * p.x() / p.z() + K.cx, K.fy * p.y() / p.z() + K.cy};
}

Eigen::Vector3d backproject(const Intrinsics& K, const Eigen::Vector2d& u, double z) {
    if (z <= 0.0) throw NonPositiveDepth();
    return {(u.x() - K.cx) / K.fx * z, (u.y() - K.cy) / K.fy * z, z};
}

Eigen::Vector2d warp_pixel(const Intrinsics& K, const Eigen::Vector2d& u, double z,
                           const Twist& xi) {
    const Eigen::Vector3d p = exp_twist(xi).apply(backproject(K, u, z));
    if (p.z() <= 0.0) throw BehindCamera();
    return project(K, p);
}

RigidTransform rigid_align(const std::vector<Eigen::Vector3d>& from,
                           const std::vector<Eigen::Vector3d>& to) {
    Eigen::Vector3d mean_from = Eigen::Vector3d::Zero(), mean_to = Eigen::Vector3d::Zero();
    for (const auto& p : from) mean_from += p;
    for (const auto& q : to) mean_to += q;
    mean_from /= static_cast<double>(from.size());
    mean_to /= static_cast<double>(to.size());

    Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
    for (size_t i = 0; i < from.size(); ++i)
        H += (from[i] - mean_from) * (to[i] - mean_to).transpose();

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d R = svd.matrixV() * svd.matrixU().transpose();
    if (R.determinant() < 0) {
        Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
        flip(2, 2) = -1;
        R = svd.matrixV() * flip * svd.matrixU().transpose();
    }
    return {R, mean_to - R * mean_from};
}

Intrinsics halve_intrinsics(const Intrinsics& K) {
    Intrinsics H;
    H.fx = K.fx * 0.5;
    H.fy = K.fy * 0.5;
    H.cx = (K.cx + 0.5) * 0.5 - 0.5;
    H.cy = (K.cy + 0.5) * 0.5 - 0.5;
    H.width = K.width / 2;
    H.height = K.height / 2;
    return H;
}

}  // namespace pslam
