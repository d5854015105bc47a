#include "pslam/oracle_matches.hpp"

#include <cmath>
#include <map>

namespace pslam::synth {

void OracleMatcher::begin_pair(const RgbdFrame& prev, const SegmentedFrame&,
                               const RgbdFrame& cur, const SegmentedFrame& cur_seg) {
    prev_index_ = static_cast<int>(std::lround(prev.timestamp * fps_));
    cur_index_ = static_cast<int>(std::lround(cur.timestamp * fps_));
    cur_seg_ = &cur_seg;
    if (prev_index_ < 0 || cur_index_ >= static_cast<int>(seq_.truth.size()))
        throw Error("oracle matcher: frame outside the rendered sequence");
}

RigidTransform OracleMatcher::true_egocentric(int instance) const {
    const GroundTruthFrame& a = seq_.truth[prev_index_];
    const GroundTruthFrame& b = seq_.truth[cur_index_];
    if (instance == 0) return a.camera_pose.inverse() * b.camera_pose;
    const RigidTransform& obj_a = a.object_poses[instance - 1];
    const RigidTransform& obj_b = b.object_poses[instance - 1];
    // Current-camera coordinates of an object point into previous-camera ones.
    return a.camera_pose.inverse() * obj_a * obj_b.inverse() * b.camera_pose;
}

MatchSet OracleMatcher::match_planes(int cur_label, int prev_label) {
    MatchSet out;
    out.current_plane = cur_label;
    out.previous_plane = prev_label;
    if (!cur_seg_ || cur_label < 1 || cur_label > cur_seg_->labels.plane_count) return out;

    const ExtractedPlane& plane = cur_seg_->planes[cur_label - 1];
    const GroundTruthFrame& truth = seq_.truth[cur_index_];
    const GroundTruthFrame& prev_truth = seq_.truth[prev_index_];
    const Intrinsics& K = seq_.frames[cur_index_].intrinsics;
    const int W = truth.true_depth.width();

    // Dominant instance over the plane's pixels decides the true motion.
    std::map<int, int> votes;
    for (size_t i = 0; i < plane.pixels.size(); i += 7)
        votes[truth.instance_mask.at(plane.pixels[i] % W, plane.pixels[i] / W)]++;
    int instance = 0, best = -1;
    for (const auto& [id, n] : votes)
        if (n > best) {
            best = n;
            instance = id;
        }

    const RigidTransform T = true_egocentric(instance);
    const size_t stride = std::max<size_t>(1, plane.pixels.size() / max_per_plane_);
    for (size_t i = 0; i < plane.pixels.size() && out.pairs.size() < size_t(max_per_plane_);
         i += stride) {
        const int idx = plane.pixels[i];
        const int x = idx % W, y = idx / W;
        if (truth.instance_mask.at(x, y) != instance) continue;
        const double z = truth.true_depth.at(x, y);
        if (z <= 0) continue;

        Keypoint3d cur_kp;
        cur_kp.pixel = {double(x), double(y)};
        cur_kp.point = backproject(K, cur_kp.pixel, z);
        cur_kp.plane_index = cur_label;

        Keypoint3d prev_kp;
        prev_kp.point = T.apply(cur_kp.point);
        if (prev_kp.point.z() <= 0) continue;
        prev_kp.pixel = project(K, prev_kp.point);
        if (prev_kp.pixel.x() < 0 || prev_kp.pixel.x() > K.width - 1 ||
            prev_kp.pixel.y() < 0 || prev_kp.pixel.y() > K.height - 1)
            continue;
        // Reject points occluded in the previous frame.
        const int px = static_cast<int>(std::lround(prev_kp.pixel.x()));
        const int py = static_cast<int>(std::lround(prev_kp.pixel.y()));
        const float prev_z = prev_truth.true_depth.at(px, py);
        if (prev_z > 0 && prev_kp.point.z() > prev_z + 0.05) continue;
        prev_kp.plane_index = prev_label;

        out.pairs.push_back({cur_kp, prev_kp});
    }
    return out;
}

}  // namespace pslam::synth
