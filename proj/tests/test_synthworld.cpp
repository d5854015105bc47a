#include <doctest.h>

#include <cmath>

#include "pslam/synthworld.hpp"

using namespace pslam;
using namespace pslam::synth;

namespace {

SceneSpec bare_wall_scene() {
    SceneSpec spec;
    spec.room_min = {-50, -50, -1};
    spec.room_max = {50, 50, 2};  // only the z = 2 face is reachable
    spec.frame_count = 1;
    spec.camera = MotionScript::fixed(RigidTransform::identity());
    return spec;
}

}  // namespace

TEST_CASE("wall depth follows the analytic ray formula") {
    const SceneSpec spec = bare_wall_scene();
    const RenderedSequence seq = render_sequence(spec);
    const Intrinsics& K = spec.intrinsics;
    for (int y = 0; y < K.height; y += 7)
        for (int x = 0; x < K.width; x += 11) {
            // Projective depth of a fronto-parallel wall is constant...
            CHECK(seq.frames[0].depth.at(x, y) == doctest::Approx(2.0).epsilon(1e-6));
            // ...and the Euclidean ray length is 2 / cos(ray angle).
            const Eigen::Vector3d dir((x - K.cx) / K.fx, (y - K.cy) / K.fy, 1.0);
            const double cos_angle = 1.0 / dir.norm();
            const double ray_len = seq.frames[0].depth.at(x, y) * dir.norm();
            CHECK(ray_len == doctest::Approx(2.0 / cos_angle).epsilon(1e-6));
            CHECK(seq.truth[0].instance_mask.at(x, y) == 0);
        }
}

TEST_CASE("rendered depth equals the analytic nearest intersection") {
    const SceneSpec spec = scenario('b');
    const RenderedSequence seq = render_sequence(spec);
    const int f = 10;
    const double t = f / spec.fps;
    for (int y = 0; y < spec.intrinsics.height; y += 13)
        for (int x = 0; x < spec.intrinsics.width; x += 17) {
            int instance = -1;
            const double z = analytic_depth(spec, t, x, y, &instance);
            CHECK(std::abs(seq.truth[f].true_depth.at(x, y) - z) < 1e-6);
            CHECK(seq.truth[f].instance_mask.at(x, y) == instance);
        }
}

TEST_CASE("centered box mask area matches the projected quad") {
    SceneSpec spec = bare_wall_scene();
    spec.room_max.z() = 6;
    BoxActor box;
    box.half_extents = {0.3, 0.2, 0.1};
    box.script = MotionScript::fixed(RigidTransform::identity());
    // Fronto-parallel, centered on the optical axis at z = 1.5 (front face at 1.4).
    box.script.waypoints[0].second.translation = {0, 0, 1.5};
    box.script.waypoints[1].second.translation = {0, 0, 1.5};
    spec.boxes.push_back(box);

    const RenderedSequence seq = render_sequence(spec);
    long count = 0;
    for (uint8_t m : seq.truth[0].instance_mask) count += (m == 1);

    const double zf = 1.4;
    const double area =
        (2 * 0.3 * spec.intrinsics.fx / zf) * (2 * 0.2 * spec.intrinsics.fy / zf);
    CHECK(std::abs(count - area) < 0.01 * area);
}

TEST_CASE("rendering is deterministic for a fixed spec and seed") {
    SceneSpec spec = scenario('b', 3);
    spec.frame_count = 2;
    spec.depth_noise = true;
    const RenderedSequence a = render_sequence(spec);
    const RenderedSequence b = render_sequence(spec);
    for (int f = 0; f < 2; ++f) {
        CHECK(std::equal(a.frames[f].depth.begin(), a.frames[f].depth.end(),
                         b.frames[f].depth.begin()));
        CHECK(std::equal(a.frames[f].intensity.begin(), a.frames[f].intensity.end(),
                         b.frames[f].intensity.begin()));
    }
}

TEST_CASE("uncoverable scripts are rejected") {
    SceneSpec spec = bare_wall_scene();
    spec.frame_count = 60;
    spec.camera = MotionScript{};
    spec.camera.add(0.0, RigidTransform::identity());
    spec.camera.add(0.5, RigidTransform::identity());  // sequence lasts ~2 s
    CHECK_THROWS_AS(render_sequence(spec), SpecError);
}

TEST_CASE("zero drift returns the ground truth") {
    Trajectory gt;
    for (int i = 0; i < 100; ++i)
        gt.push(i / 30.0, {Eigen::Matrix3d::Identity(), {0.01 * i, 0, 0}});
    const Trajectory prior = inject_drift(gt, 0.0, 0.0, 1);
    for (size_t i = 0; i < gt.size(); ++i) {
        CHECK((prior.samples[i].pose.translation - gt.samples[i].pose.translation).norm() <
              1e-12);
        CHECK((prior.samples[i].pose.rotation - gt.samples[i].pose.rotation).norm() < 1e-12);
    }
}

TEST_CASE("drift accumulates like a persistent random walk") {
    Trajectory gt;
    for (int i = 0; i < 300; ++i)
        gt.push(i / 30.0, {Eigen::Matrix3d::Identity(), {0.02 * i, 0, 0}});

    int within = 0;
    for (uint32_t seed = 0; seed < 100; ++seed) {
        const Trajectory prior = inject_drift(gt, 0.07, 0.0, seed);
        const double offset = (prior.samples.back().pose.translation -
                               gt.samples.back().pose.translation)
                                  .norm();
        const double full = 0.07 * (299.0 / 30.0);
        if (offset >= 0.35 * full && offset <= 1.05 * full) ++within;
    }
    CHECK(within == 100);
}

TEST_CASE("prior RPE sits at the requested drift rate") {
    Trajectory gt;
    for (int i = 0; i < 300; ++i)
        gt.push(i / 30.0, {Eigen::Matrix3d::Identity(), {0.02 * i, 0, 0.01 * i}});
    const Trajectory prior = inject_drift(gt, 0.07, 0.0, 5);
    const double rpe = rpe_rmse(prior, gt, 1.0);
    CHECK(rpe > 0.07 * 0.85);
    CHECK(rpe < 0.07 * 1.15);
}

TEST_CASE("scenario catalogue") {
    const auto scenarios = paper_analog_scenarios();
    REQUIRE(scenarios.size() == 4);
    CHECK(scenarios[0].boxes.empty());
    CHECK(scenarios[0].blobs.empty());
    CHECK(scenarios[1].boxes.size() == 2);
    CHECK(scenarios[1].blobs.size() == 1);
    CHECK(scenarios[3].boxes.size() == 2);
}

TEST_CASE("scenario b reaches half-frame dynamic coverage") {
    SceneSpec spec = scenario('b');
    spec.frame_count = 11;
    const RenderedSequence seq = render_sequence(spec);
    long dynamic = 0, valid = 0;
    for (int y = 0; y < spec.intrinsics.height; ++y)
        for (int x = 0; x < spec.intrinsics.width; ++x) {
            if (seq.frames[10].depth.at(x, y) <= 0) continue;
            ++valid;
            dynamic += (seq.truth[10].instance_mask.at(x, y) != 0);
        }
    CHECK(static_cast<double>(dynamic) / valid >= 0.5);
}

TEST_CASE("scenario d fully occludes the moving box for several frames") {
    const SceneSpec spec = scenario('d');
    const RenderedSequence seq = render_sequence(spec);
    std::vector<int> visible(seq.frames.size(), 0);
    for (size_t f = 0; f < seq.frames.size(); ++f)
        for (uint8_t m : seq.truth[f].instance_mask) visible[f] += (m == 2);

    CHECK(visible.front() > 500);  // starts clearly in view
    int best_gap = 0, gap = 0;
    bool seen_before = false, seen_after = false;
    for (size_t f = 0; f < visible.size(); ++f) {
        if (visible[f] == 0 && seen_before) {
            gap++;
            best_gap = std::max(best_gap, gap);
        } else {
            if (visible[f] > 0 && best_gap >= 5) seen_after = true;
            if (visible[f] > 0) seen_before = true;
            gap = 0;
        }
    }
    CHECK(best_gap >= 5);
    CHECK(seen_after);
}
