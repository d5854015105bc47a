#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "pslam/geometry.hpp"

using namespace pslam;

namespace {

// Independent oracle: exponential of the 4x4 twist matrix by truncated power series.
Eigen::Matrix4d exp_series(const Twist& xi) {
    Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
    A.topLeftCorner<3, 3>() = skew(xi.w);
    A.topRightCorner<3, 1>() = xi.v;
    Eigen::Matrix4d result = Eigen::Matrix4d::Identity();
    Eigen::Matrix4d term = Eigen::Matrix4d::Identity();
    for (int n = 1; n <= 30; ++n) {
        term = term * A / n;
        result += term;
    }
    return result;
}

Twist random_twist(std::mt19937& rng, double trans_scale, double max_angle) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::Vector3d v(u(rng), u(rng), u(rng));
    Eigen::Vector3d w(u(rng), u(rng), u(rng));
    if (w.norm() > 0) w *= std::uniform_real_distribution<double>(0.0, max_angle)(rng) / w.norm();
    return {trans_scale * v, w};
}

}  // namespace

TEST_CASE("exp of zero twist is the identity") {
    const RigidTransform T = exp_twist(Twist::zero());
    CHECK((T.rotation - Eigen::Matrix3d::Identity()).norm() == doctest::Approx(0.0));
    CHECK(T.translation.norm() == doctest::Approx(0.0));
}

TEST_CASE("pure translation twist") {
    const RigidTransform T = exp_twist(Twist({1, 0, 0}, {0, 0, 0}));
    CHECK((T.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-15);
    CHECK((T.translation - Eigen::Vector3d(1, 0, 0)).norm() < 1e-15);
}

TEST_CASE("exp matches the power-series oracle near zero rotation") {
    std::mt19937 rng(7);
    for (int i = 0; i < 200; ++i) {
        const Twist xi = random_twist(rng, 1.0, 1e-3);
        const RigidTransform T = exp_twist(xi);
        const Eigen::Matrix4d M = exp_series(xi);
        CHECK((T.rotation - M.topLeftCorner<3, 3>()).norm() < 1e-12);
        CHECK((T.translation - M.topRightCorner<3, 1>()).norm() < 1e-12);
    }
}

TEST_CASE("exp/log roundtrip over the canonical domain") {
    std::mt19937 rng(42);
    for (int i = 0; i < 500; ++i) {
        const Twist xi = random_twist(rng, 2.0, M_PI - 1e-3);
        const Twist back = log_transform(exp_twist(xi));
        CHECK((back.vec() - xi.vec()).norm() < 1e-9);
    }
}

TEST_CASE("log of identity is zero") {
    CHECK(log_transform(RigidTransform::identity()).vec().norm() == doctest::Approx(0.0));
}

TEST_CASE("log recovers a specific twist") {
    const Twist xi({0.1, -0.2, 0.3}, {0.05, 0.0, -0.05});
    const Twist back = log_transform(exp_twist(xi));
    CHECK((back.vec() - xi.vec()).norm() < 1e-9);
}

TEST_CASE("log rejects rotations at pi") {
    RigidTransform T;
    T.rotation = Eigen::AngleAxisd(M_PI, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    CHECK_THROWS_AS(log_transform(T), AngleNearPi);
}

TEST_CASE("exp composition acts like matrix composition on points") {
    std::mt19937 rng(3);
    for (int i = 0; i < 50; ++i) {
        const Twist a = random_twist(rng, 1.0, 2.0);
        const Twist b = random_twist(rng, 1.0, 2.0);
        const Eigen::Vector3d p(0.3, -0.7, 1.9);
        const Eigen::Vector3d via_compose = (exp_twist(a) * exp_twist(b)).apply(p);
        const Eigen::Vector3d via_chain = exp_twist(a).apply(exp_twist(b).apply(p));
        CHECK((via_compose - via_chain).norm() < 1e-12);
    }
}

TEST_CASE("transform_plane under identity is a no-op") {
    const Plane p(Eigen::Vector3d(0, 0, 1), -2.0);
    const Plane q = transform_plane(RigidTransform::identity(), p);
    CHECK((q.normal - p.normal).norm() < 1e-15);
    CHECK(q.offset == doctest::Approx(p.offset));
}

TEST_CASE("transformed plane contains transformed points") {
    // z = 2 plane rotated 90 degrees about x; sampled supporting points must map onto it.
    const Plane plane(Eigen::Vector3d(0, 0, 1), -2.0);
    RigidTransform T;
    T.rotation = Eigen::AngleAxisd(M_PI / 2, Eigen::Vector3d::UnitX()).toRotationMatrix();
    T.translation = Eigen::Vector3d(0.4, -0.1, 0.7);
    const Plane moved = transform_plane(T, plane);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 100; ++i) {
        const Eigen::Vector3d p(u(rng), u(rng), 2.0);
        REQUIRE(std::abs(plane.signed_distance(p)) < 1e-12);
        CHECK(std::abs(moved.signed_distance(T.apply(p))) < 1e-9);
    }
}

TEST_CASE("plane transform roundtrip") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        Eigen::Vector3d n(u(rng), u(rng), u(rng));
        while (n.norm() < 1e-3) n = Eigen::Vector3d(u(rng), u(rng), u(rng));
        const Plane plane(n.normalized(), u(rng) * 3.0);
        const RigidTransform T = exp_twist(random_twist(rng, 1.0, 2.5));
        const Plane back = transform_plane(T.inverse(), transform_plane(T, plane));
        CHECK((back.normal - plane.normal).norm() < 1e-9);
        CHECK(back.offset == doctest::Approx(plane.offset).epsilon(1e-9));
    }
}

TEST_CASE("plane qparam formula") {
    CHECK((plane_qparam(Plane({0, 0, 1}, 2.0)) - Eigen::Vector3d(0, 0, 2)).norm() < 1e-15);

    const double s = 1.0 / std::sqrt(2.0);
    const Eigen::Vector3d q = plane_qparam(Plane({s, 0, s}, 0.0));
    CHECK(q.x() == doctest::Approx(M_PI / 4));
    CHECK(q.y() == doctest::Approx(0.0));
    CHECK(q.z() == doctest::Approx(0.0));

    CHECK_THROWS_AS(plane_qparam(Plane({1, 0, 0}, 1.0)), DegenerateNormal);
}

TEST_CASE("stable chart picks the dominant normal axis") {
    CHECK(stable_qchart(Plane({1, 0, 0}, 0)) == QChart::X);
    CHECK(stable_qchart(Plane({0, 1, 0}, 0)) == QChart::Y);
    CHECK(stable_qchart(Plane({0, 0, -1}, 0)) == QChart::Z);
    CHECK_NOTHROW(plane_qparam(Plane({1, 0, 0}, 0), QChart::X));
}

TEST_CASE("qparam jacobian matches finite differences") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        Eigen::Vector3d n(u(rng), u(rng), u(rng));
        while (n.norm() < 1e-2) n = Eigen::Vector3d(u(rng), u(rng), u(rng));
        n.normalize();
        const Plane plane(n, u(rng));
        const QChart chart = stable_qchart(plane);
        const Eigen::Matrix<double, 3, 4> J = plane_qparam_jacobian(plane, chart);

        const double h = 1e-7;
        for (int c = 0; c < 4; ++c) {
            Plane hi = plane, lo = plane;
            if (c < 3) {
                hi.normal[c] += h;
                lo.normal[c] -= h;
            } else {
                hi.offset += h;
                lo.offset -= h;
            }
            const Eigen::Vector3d fd =
                (plane_qparam(hi, chart) - plane_qparam(lo, chart)) / (2 * h);
            CHECK((J.col(c) - fd).norm() < 1e-5);
        }
    }
}

TEST_CASE("projection hits the principal point on the optical axis") {
    const Intrinsics K{525, 525, 319.5, 239.5, 640, 480};
    const Eigen::Vector2d u = project(K, {0, 0, 2});
    CHECK(u.x() == doctest::Approx(319.5));
    CHECK(u.y() == doctest::Approx(239.5));
}

TEST_CASE("projection roundtrip") {
    const Intrinsics K{525, 525, 319.5, 239.5, 640, 480};
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> uz(0.1, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const Eigen::Vector3d p(u(rng), u(rng), uz(rng));
        const Eigen::Vector3d back = backproject(K, project(K, p), p.z());
        CHECK((back - p).norm() < 1e-9);
    }
}

TEST_CASE("zero depth is rejected") {
    const Intrinsics K{525, 525, 319.5, 239.5, 640, 480};
    CHECK_THROWS_AS(project(K, {0, 0, 0}), NonPositiveDepth);
    CHECK_THROWS_AS(backproject(K, {10, 10}, 0.0), NonPositiveDepth);
}

TEST_CASE("warp with zero motion is the identity") {
    const Intrinsics K{260, 260, 159.5, 119.5, 320, 240};
    const Eigen::Vector2d u(77.0, 41.0);
    CHECK((warp_pixel(K, u, 1.7, Twist::zero()) - u).norm() < 1e-12);
}

TEST_CASE("moving toward the scene pushes pixels outward") {
    const Intrinsics K{260, 260, 159.5, 119.5, 320, 240};
    const Eigen::Vector2d principal(159.5, 119.5);
    const Eigen::Vector2d u(200.0, 150.0);
    // Motion that brings the scene closer: the warped pixel lands farther out.
    const Eigen::Vector2d warped = warp_pixel(K, u, 2.0, Twist({0, 0, -0.3}, {0, 0, 0}));
    CHECK((warped - principal).norm() > (u - principal).norm());
}

TEST_CASE("warp roundtrip through the warped depth") {
    const Intrinsics K{260, 260, 159.5, 119.5, 320, 240};
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> ux(5.0, 314.0), uy(5.0, 234.0), uz(0.5, 5.0);
    for (int i = 0; i < 200; ++i) {
        const Twist xi = random_twist(rng, 0.1, 0.2);
        const Eigen::Vector2d u(ux(rng), uy(rng));
        const double z = uz(rng);
        const Eigen::Vector2d v = warp_pixel(K, u, z, xi);
        const double zv = exp_twist(xi).apply(backproject(K, u, z)).z();
        const Twist neg = log_transform(exp_twist(xi).inverse());
        const Eigen::Vector2d back = warp_pixel(K, v, zv, neg);
        CHECK((back - u).norm() < 1e-6);
    }
}

TEST_CASE("warp behind the camera is rejected") {
    const Intrinsics K{260, 260, 159.5, 119.5, 320, 240};
    CHECK_THROWS_AS(warp_pixel(K, {160, 120}, 0.5, Twist({0, 0, -1.0}, {0, 0, 0})),
                    BehindCamera);
}
