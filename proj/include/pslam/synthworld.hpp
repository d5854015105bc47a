#pragma once

#include <string>
#include <vector>

#include "pslam/evalkit.hpp"
#include "pslam/frame.hpp"

namespace pslam::synth {

struct SpecError : Error {
    using Error::Error;
};

/// Timestamped pose waypoints with geodesic interpolation between them.
struct MotionScript {
    std::vector<std::pair<double, RigidTransform>> waypoints;

    static MotionScript fixed(const RigidTransform& pose);
    void add(double t, const RigidTransform& pose);
    RigidTransform pose_at(double t) const;
    bool covers(double t0, double t1) const;
};

struct BoxActor {
    Eigen::Vector3d half_extents = {0.25, 0.25, 0.25};
    MotionScript script;  // T_WB(t)
    uint32_t texture_seed = 1;
};

/// Cluster of spheres moving rigidly; the non-planar dynamic actor.
struct SphereBlobActor {
    std::vector<Eigen::Vector3d> centers;  // local offsets
    double radius = 0.12;
    MotionScript script;  // T_WB(t)
    uint32_t texture_seed = 2;
};

struct SceneSpec {
    Eigen::Vector3d room_min = {-3, -2, -2};
    Eigen::Vector3d room_max = {3, 2, 6};
    uint32_t room_texture_seed = 7;
    std::vector<BoxActor> boxes;
    std::vector<SphereBlobActor> blobs;
    MotionScript camera;  // T_WC(t)
    double fps = 30.0;
    int frame_count = 60;
    Intrinsics intrinsics{262.5, 262.5, 159.5, 119.5, 320, 240};
    bool depth_noise = false;
    uint32_t seed = 0;
    std::string name = "custom";

    int object_count() const { return static_cast<int>(boxes.size() + blobs.size()); }
};

struct GroundTruthFrame {
    RigidTransform camera_pose;                // T_WC
    std::vector<RigidTransform> object_poses;  // T_WO per instance id - 1
    ByteImage instance_mask;                   // 0 static, k = instance id
    FloatImage true_depth;                     // noise-free
};

struct RenderedSequence {
    std::vector<RgbdFrame> frames;
    std::vector<GroundTruthFrame> truth;
    int object_count = 0;
};

/// Ray-cast rendering of the scene; deterministic for a fixed (spec, seed).
RenderedSequence render_sequence(const SceneSpec& spec);

/// Analytic nearest-hit depth for one pixel (no noise); the render oracle.
double analytic_depth(const SceneSpec& spec, double t, int x, int y, int* instance = nullptr);

/// Distance from a point to the static room shell (for map accuracy checks).
double room_surface_distance(const SceneSpec& spec, const Eigen::Vector3d& p);

/// Random-walk odometry drift with slowly diffusing direction.
Trajectory inject_drift(const Trajectory& truth, double trans_rate, double rot_rate,
                        uint32_t seed);

/// Canned scenes: (a) static sweep, (b) heavy dynamic coverage + blob,
/// (c) overtaking, (d) occlusion with a reappearing box.
SceneSpec scenario(char which, uint32_t seed = 0);
std::vector<SceneSpec> paper_analog_scenarios();

/// Writes the dataset directory plus ground-truth and drifted-prior trajectories.
void write_sequence(const std::string& directory, const SceneSpec& spec,
                    double drift_trans = 0.07, double drift_rot = 0.4);

}  // namespace pslam::synth
