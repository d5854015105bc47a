#pragma once

#include <string>
#include <vector>

#include "pslam/geometry.hpp"
#include "pslam/image.hpp"

namespace pslam {

struct TooFewPairs : Error {
    TooFewPairs() : Error("not enough timestamp-associated pose pairs") {}
};

struct TrajectorySample {
    double timestamp = 0.0;
    RigidTransform pose;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;  // strictly increasing timestamps

    void push(double t, const RigidTransform& pose) { samples.push_back({t, pose}); }
    size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
};

/// Pose index pairs (est, gt) with timestamps within `window` seconds.
std::vector<std::pair<size_t, size_t>> associate(const Trajectory& est, const Trajectory& gt,
                                                 double window = 0.02);

/// Rigid (no scale) least-squares alignment of estimated positions onto ground truth.
RigidTransform align(const Trajectory& est, const Trajectory& gt);

/// RMS translational residual after align(), meters.
double ate_rmse(const Trajectory& est, const Trajectory& gt);

/// RMS translational relative-pose error over `delta`-second windows, meters per second.
double rpe_rmse(const Trajectory& est, const Trajectory& gt, double delta = 1.0);

/// Intersection-over-union of two binary masks, restricted to valid pixels.
double segmentation_iou(const ByteImage& pred, const ByteImage& gt,
                        const ByteImage* valid = nullptr);

/// TUM format: "timestamp tx ty tz qx qy qz qw" per line, '#' comments allowed.
Trajectory read_tum_trajectory(const std::string& path);
void write_tum_trajectory(const std::string& path, const Trajectory& traj);

}  // namespace pslam
