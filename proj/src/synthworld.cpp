#include "pslam/synthworld.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "pslam/dataset_io.hpp"

namespace fs = std::filesystem;

namespace pslam::synth {

// ---------------------------------------------------------------- scripts

MotionScript MotionScript::fixed(const RigidTransform& pose) {
    MotionScript s;
    s.waypoints = {{0.0, pose}, {1e9, pose}};
    return s;
}

void MotionScript::add(double t, const RigidTransform& pose) {
    if (!waypoints.empty() && t <= waypoints.back().first)
        throw SpecError("script waypoints must have increasing timestamps");
    waypoints.push_back({t, pose});
}

bool MotionScript::covers(double t0, double t1) const {
    return !waypoints.empty() && waypoints.front().first <= t0 && waypoints.back().first >= t1;
}

RigidTransform MotionScript::pose_at(double t) const {
    if (waypoints.empty()) throw SpecError("empty motion script");
    if (t <= waypoints.front().first) return waypoints.front().second;
    if (t >= waypoints.back().first) return waypoints.back().second;
    size_t hi = 1;
    while (waypoints[hi].first < t) ++hi;
    const auto& [t0, T0] = waypoints[hi - 1];
    const auto& [t1, T1] = waypoints[hi];
    const double s = (t - t0) / (t1 - t0);
    const Twist step = log_transform(T0.inverse() * T1);
    return T0 * exp_twist(s * step);
}

// ---------------------------------------------------------------- texture

namespace {

uint32_t hash_u32(uint32_t x) {
    x ^= x >> 16;
    x *= 0x7feb352dU;
    x ^= x >> 15;
    x *= 0x846ca68bU;
    x ^= x >> 16;
    return x;
}

double lattice_value(uint32_t seed, int ix, int iy) {
    const uint32_t h =
        hash_u32(seed ^ hash_u32(static_cast<uint32_t>(ix) * 0x9e3779b9U ^
                                 hash_u32(static_cast<uint32_t>(iy) + 0x85ebca6bU)));
    return h * (1.0 / 4294967295.0);
}

double smoothstep01(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
}

// Band-limited lattice noise in [0, 1].
double value_noise(uint32_t seed, double x, double y) {
    const int ix = static_cast<int>(std::floor(x));
    const int iy = static_cast<int>(std::floor(y));
    const double fx = smoothstep01(x - ix);
    const double fy = smoothstep01(y - iy);
    const double v00 = lattice_value(seed, ix, iy);
    const double v10 = lattice_value(seed, ix + 1, iy);
    const double v01 = lattice_value(seed, ix, iy + 1);
    const double v11 = lattice_value(seed, ix + 1, iy + 1);
    return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
}

// Checker with smoothed cell transitions so warping interpolates cleanly.
double soft_checker(double u, double v, double cell, double soft) {
    const double gu = u / cell, gv = v / cell;
    const int pu = static_cast<int>(std::floor(gu)), pv = static_cast<int>(std::floor(gv));
    const double fu = gu - pu, fv = gv - pv;
    const double eu = std::min(fu, 1.0 - fu), ev = std::min(fv, 1.0 - fv);
    const double w = smoothstep01(std::min(eu, ev) / soft);
    const bool parity = ((pu ^ pv) & 1) != 0;
    return 0.5 + (parity ? 0.5 : -0.5) * w;
}

double surface_intensity(uint32_t seed, double u, double v) {
    const double c1 = soft_checker(u + 0.013, v + 0.007, 0.21, 0.18);
    const double c2 = soft_checker(u + 0.05, v - 0.03, 0.07, 0.25);
    const double n = value_noise(seed, u / 0.045, v / 0.045);
    return std::clamp(0.12 + 0.42 * c1 + 0.24 * c2 + 0.22 * n, 0.0, 1.0);
}

struct Hit {
    double z = std::numeric_limits<double>::infinity();  // camera-frame depth
    int instance = 0;                                    // 0 = static room
    double intensity = 0.5;
};

// Exit of a ray known to start inside the AABB; face-local texture coords.
void intersect_room(const SceneSpec& spec, const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                    Hit& hit) {
    double best = std::numeric_limits<double>::infinity();
    int axis = -1;
    double bound = 0;
    for (int i = 0; i < 3; ++i) {
        if (std::abs(d[i]) < 1e-12) continue;
        const double b = d[i] > 0 ? spec.room_max[i] : spec.room_min[i];
        const double z = (b - o[i]) / d[i];
        if (z > 1e-9 && z < best) {
            best = z;
            axis = i;
            bound = b;
        }
    }
    if (axis < 0) return;
    const Eigen::Vector3d p = o + best * d;
    const int ua = (axis + 1) % 3, va = (axis + 2) % 3;
    hit.z = best;
    hit.instance = 0;
    hit.intensity = surface_intensity(hash_u32(spec.room_texture_seed + axis * 2 +
                                               (bound > (spec.room_min[axis] + spec.room_max[axis]) / 2)),
                                      p[ua], p[va]);
}

void intersect_box(const BoxActor& box, const RigidTransform& T_WB, const Eigen::Vector3d& o,
                   const Eigen::Vector3d& d, int instance, Hit& hit) {
    const RigidTransform T_BW = T_WB.inverse();
    const Eigen::Vector3d ol = T_BW.apply(o);
    const Eigen::Vector3d dl = T_BW.rotation * d;

    double z_near = -std::numeric_limits<double>::infinity();
    double z_far = std::numeric_limits<double>::infinity();
    int near_axis = -1;
    for (int i = 0; i < 3; ++i) {
        const double h = box.half_extents[i];
        if (std::abs(dl[i]) < 1e-12) {
            if (std::abs(ol[i]) > h) return;
            continue;
        }
        double z0 = (-h - ol[i]) / dl[i];
        double z1 = (h - ol[i]) / dl[i];
        if (z0 > z1) std::swap(z0, z1);
        if (z0 > z_near) {
            z_near = z0;
            near_axis = i;
        }
        z_far = std::min(z_far, z1);
        if (z_near > z_far) return;
    }
    if (near_axis < 0 || z_near <= 1e-9 || z_near >= hit.z) return;

    const Eigen::Vector3d pl = ol + z_near * dl;
    const int ua = (near_axis + 1) % 3, va = (near_axis + 2) % 3;
    hit.z = z_near;
    hit.instance = instance;
    hit.intensity = surface_intensity(
        hash_u32(box.texture_seed * 31 + near_axis * 2 + (pl[near_axis] > 0)), pl[ua], pl[va]);
}

void intersect_blob(const SphereBlobActor& blob, const RigidTransform& T_WB,
                    const Eigen::Vector3d& o, const Eigen::Vector3d& d, int instance, Hit& hit) {
    const RigidTransform T_BW = T_WB.inverse();
    const Eigen::Vector3d ol = T_BW.apply(o);
    const Eigen::Vector3d dl = T_BW.rotation * d;
    const double a = dl.squaredNorm();
    for (size_t s = 0; s < blob.centers.size(); ++s) {
        const Eigen::Vector3d oc = ol - blob.centers[s];
        const double b = 2.0 * dl.dot(oc);
        const double c = oc.squaredNorm() - blob.radius * blob.radius;
        const double disc = b * b - 4 * a * c;
        if (disc <= 0) continue;
        const double z = (-b - std::sqrt(disc)) / (2 * a);
        if (z <= 1e-9 || z >= hit.z) continue;
        const Eigen::Vector3d n = (oc + z * dl).normalized();
        hit.z = z;
        hit.instance = instance;
        hit.intensity = surface_intensity(hash_u32(blob.texture_seed * 131 + uint32_t(s)),
                                          blob.radius * std::atan2(n.y(), n.x()) * 2.0,
                                          blob.radius * std::asin(std::clamp(n.z(), -1.0, 1.0)) * 2.0);
    }
}

Hit cast_ray(const SceneSpec& spec, double t, const RigidTransform& T_WC,
             const Eigen::Vector3d& dir_cam) {
    const Eigen::Vector3d o = T_WC.translation;
    const Eigen::Vector3d d = T_WC.rotation * dir_cam;
    Hit hit;
    intersect_room(spec, o, d, hit);
    int instance = 1;
    for (const auto& box : spec.boxes) intersect_box(box, box.script.pose_at(t), o, d, instance++, hit);
    for (const auto& blob : spec.blobs)
        intersect_blob(blob, blob.script.pose_at(t), o, d, instance++, hit);
    return hit;
}

void validate(const SceneSpec& spec) {
    const double duration = (spec.frame_count - 1) / spec.fps;
    if (!spec.camera.covers(0.0, duration)) throw SpecError("camera script does not cover the sequence");
    for (const auto& box : spec.boxes)
        if (!box.script.covers(0.0, duration)) throw SpecError("box script does not cover the sequence");
    for (const auto& blob : spec.blobs)
        if (!blob.script.covers(0.0, duration)) throw SpecError("blob script does not cover the sequence");
    for (int f = 0; f < spec.frame_count; ++f) {
        const double t = f / spec.fps;
        for (const auto& box : spec.boxes) {
            const Eigen::Vector3d c = box.script.pose_at(t).translation;
            for (int i = 0; i < 3; ++i)
                if (c[i] < spec.room_min[i] || c[i] > spec.room_max[i])
                    throw SpecError("box leaves the room during the sequence");
        }
    }
}

}  // namespace

double analytic_depth(const SceneSpec& spec, double t, int x, int y, int* instance) {
    const Intrinsics& K = spec.intrinsics;
    const Eigen::Vector3d dir((x - K.cx) / K.fx, (y - K.cy) / K.fy, 1.0);
    const Hit hit = cast_ray(spec, t, spec.camera.pose_at(t), dir);
    if (instance) *instance = hit.instance;
    return hit.z;
}

double room_surface_distance(const SceneSpec& spec, const Eigen::Vector3d& p) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        best = std::min(best, std::abs(p[i] - spec.room_min[i]));
        best = std::min(best, std::abs(spec.room_max[i] - p[i]));
    }
    return best;
}

RenderedSequence render_sequence(const SceneSpec& spec) {
    validate(spec);
    const Intrinsics& K = spec.intrinsics;

    RenderedSequence seq;
    seq.object_count = spec.object_count();
    seq.frames.reserve(spec.frame_count);
    seq.truth.reserve(spec.frame_count);

    for (int f = 0; f < spec.frame_count; ++f) {
        const double t = f / spec.fps;
        const RigidTransform T_WC = spec.camera.pose_at(t);
        std::mt19937 noise_rng(hash_u32(spec.seed * 2654435761U + f));
        std::normal_distribution<double> gauss(0.0, 1.0);

        RgbdFrame frame;
        frame.intensity = FloatImage(K.width, K.height);
        frame.depth = FloatImage(K.width, K.height);
        frame.intrinsics = K;
        frame.timestamp = t;

        GroundTruthFrame truth;
        truth.camera_pose = T_WC;
        truth.instance_mask = ByteImage(K.width, K.height, 0);
        truth.true_depth = FloatImage(K.width, K.height, 0.0f);
        for (const auto& box : spec.boxes) truth.object_poses.push_back(box.script.pose_at(t));
        for (const auto& blob : spec.blobs) truth.object_poses.push_back(blob.script.pose_at(t));

        for (int y = 0; y < K.height; ++y)
            for (int x = 0; x < K.width; ++x) {
                const Eigen::Vector3d dir((x - K.cx) / K.fx, (y - K.cy) / K.fy, 1.0);
                const Hit hit = cast_ray(spec, t, T_WC, dir);
                if (!std::isfinite(hit.z)) continue;
                truth.true_depth.at(x, y) = static_cast<float>(hit.z);
                truth.instance_mask.at(x, y) = static_cast<uint8_t>(hit.instance);
                frame.intensity.at(x, y) = static_cast<float>(hit.intensity);
                double z = hit.z;
                if (spec.depth_noise) z += (0.0012 + 0.0019 * z * z) * gauss(noise_rng);
                frame.depth.at(x, y) = static_cast<float>(std::max(0.0, z));
            }

        seq.frames.push_back(std::move(frame));
        seq.truth.push_back(std::move(truth));
    }
    return seq;
}

Trajectory inject_drift(const Trajectory& truth, double trans_rate, double rot_rate,
                        uint32_t seed) {
    Trajectory prior;
    if (truth.empty()) return prior;
    prior.push(truth.samples[0].timestamp, truth.samples[0].pose);

    std::mt19937 rng(hash_u32(seed + 0x51ed2701U));
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto unit = [&] {
        Eigen::Vector3d v(gauss(rng), gauss(rng), gauss(rng));
        while (v.norm() < 1e-6) v = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
        return Eigen::Vector3d(v.normalized());
    };
    Eigen::Vector3d trans_dir = unit();
    Eigen::Vector3d rot_dir = unit();
    const double diffusion = 0.05;  // direction random-walk rate per frame

    for (size_t i = 1; i < truth.size(); ++i) {
        const double dt = truth.samples[i].timestamp - truth.samples[i - 1].timestamp;
        const RigidTransform rel =
            truth.samples[i - 1].pose.inverse() * truth.samples[i].pose;
        trans_dir = (trans_dir + diffusion * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng)))
                        .normalized();
        rot_dir = (rot_dir + diffusion * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng)))
                      .normalized();
        const Twist drift(trans_rate * dt * trans_dir, rot_rate * dt * rot_dir);
        prior.push(truth.samples[i].timestamp,
                   prior.samples.back().pose * (rel * exp_twist(drift)));
    }
    return prior;
}

// ---------------------------------------------------------------- scenarios

namespace {

RigidTransform look_pose(const Eigen::Vector3d& position, double yaw = 0.0, double pitch = 0.0) {
    const Eigen::Matrix3d R =
        (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()) *
         Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()))
            .toRotationMatrix();
    return {R, position};
}

BoxActor make_box(const Eigen::Vector3d& half, uint32_t seed) {
    BoxActor box;
    box.half_extents = half;
    box.texture_seed = seed;
    return box;
}

SphereBlobActor make_blob(uint32_t seed) {
    SphereBlobActor blob;
    blob.radius = 0.13;
    blob.centers = {{0, 0, 0}, {0.14, -0.1, 0.02}, {-0.13, -0.12, -0.03}, {0.02, 0.16, 0.0}};
    blob.texture_seed = seed;
    return blob;
}

}  // namespace

SceneSpec scenario(char which, uint32_t seed) {
    SceneSpec spec;
    spec.seed = seed;
    spec.name = std::string("scenario_") + which;

    switch (which) {
        case 'a': {
            // Static room sweep toward a corner; nothing moves.
            spec.frame_count = 60;
            spec.camera.add(0.0, look_pose({-0.4, 0.0, 0.0}, -0.10));
            spec.camera.add(1.0, look_pose({0.0, 0.05, 0.15}, 0.0));
            spec.camera.add(2.0, look_pose({0.4, 0.0, 0.3}, 0.12));
            break;
        }
        case 'b': {
            // Two large boxes plus a sphere blob covering most of the view.
            spec.frame_count = 60;
            spec.camera.add(0.0, look_pose({0.0, 0.0, 0.0}));
            spec.camera.add(2.0, look_pose({0.25, 0.0, 0.1}, 0.05));

            BoxActor left = make_box({0.40, 0.30, 0.18}, 11);
            left.script.add(0.0, look_pose({-0.48, 0.12, 1.45}));
            left.script.add(0.2, look_pose({-0.48, 0.12, 1.45}));
            left.script.add(2.0, look_pose({-0.12, 0.10, 1.62}, 0.10));
            spec.boxes.push_back(left);

            BoxActor right = make_box({0.36, 0.34, 0.20}, 12);
            right.script.add(0.0, look_pose({0.55, -0.05, 1.55}));
            right.script.add(0.2, look_pose({0.55, -0.05, 1.55}));
            right.script.add(2.0, look_pose({0.25, 0.10, 1.40}, -0.08));
            spec.boxes.push_back(right);

            SphereBlobActor blob = make_blob(13);
            blob.script.add(0.0, look_pose({0.05, -0.55, 1.1}));
            blob.script.add(2.0, look_pose({-0.35, -0.45, 1.25}));
            spec.blobs.push_back(blob);
            break;
        }
        case 'c': {
            // Camera overtakes two boxes drifting ahead of it.
            spec.frame_count = 60;
            spec.camera.add(0.0, look_pose({0.0, 0.0, 0.0}));
            spec.camera.add(2.0, look_pose({0.05, 0.0, 0.8}));

            BoxActor slow = make_box({0.30, 0.30, 0.22}, 21);
            slow.script.add(0.0, look_pose({-0.5, 0.1, 1.8}));
            slow.script.add(0.2, look_pose({-0.5, 0.1, 1.8}));
            slow.script.add(2.0, look_pose({-0.55, 0.1, 2.25}));
            spec.boxes.push_back(slow);

            BoxActor fast = make_box({0.28, 0.36, 0.20}, 22);
            fast.script.add(0.0, look_pose({0.55, 0.05, 2.2}));
            fast.script.add(0.2, look_pose({0.55, 0.05, 2.2}));
            fast.script.add(2.0, look_pose({0.62, 0.05, 2.9}));
            spec.boxes.push_back(fast);
            break;
        }
        case 'd': {
            // A small box crosses behind a large one and reappears.
            spec.frame_count = 100;
            spec.camera.add(0.0, look_pose({0.0, 0.0, 0.0}));
            spec.camera.add(100.0 / 30.0, look_pose({0.04, 0.0, 0.0}));

            BoxActor blocker = make_box({0.30, 0.38, 0.15}, 31);
            blocker.script = MotionScript::fixed(look_pose({0.0, 0.0, 1.3}));
            spec.boxes.push_back(blocker);

            BoxActor mover = make_box({0.16, 0.28, 0.14}, 32);
            mover.script.add(0.0, look_pose({-1.0, 0.0, 2.1}));
            mover.script.add(5.0 / 30.0, look_pose({-1.0, 0.0, 2.1}));
            mover.script.add(100.0 / 30.0, look_pose({1.0, 0.0, 2.1}));
            spec.boxes.push_back(mover);
            break;
        }
        default:
            throw SpecError(std::string("unknown scenario: ") + which);
    }
    return spec;
}

std::vector<SceneSpec> paper_analog_scenarios() {
    return {scenario('a'), scenario('b'), scenario('c'), scenario('d')};
}

void write_sequence(const std::string& directory, const SceneSpec& spec, double drift_trans,
                    double drift_rot) {
    const RenderedSequence seq = render_sequence(spec);

    DatasetWriter writer(directory, spec.intrinsics, true);
    Trajectory camera;
    std::vector<Trajectory> objects(seq.object_count);
    for (int f = 0; f < spec.frame_count; ++f) {
        writer.write_frame(f, seq.frames[f].intensity, seq.frames[f].depth);
        writer.write_mask(f, seq.truth[f].instance_mask);
        camera.push(seq.frames[f].timestamp, seq.truth[f].camera_pose);
        for (int k = 0; k < seq.object_count; ++k) {
            const RigidTransform rel =
                seq.truth[0].object_poses[k].inverse() * seq.truth[f].object_poses[k];
            objects[k].push(seq.frames[f].timestamp, rel);
        }
    }

    write_tum_trajectory(directory + "/groundtruth_camera.txt", camera);
    for (int k = 0; k < seq.object_count; ++k)
        write_tum_trajectory(directory + "/groundtruth_object_" + std::to_string(k + 1) + ".txt",
                             objects[k]);
    write_tum_trajectory(directory + "/prior_camera.txt",
                         inject_drift(camera, drift_trans, drift_rot, spec.seed));
}

}  // namespace pslam::synth
