#pragma once

#include <array>
#include <memory>
#include <vector>

#include "pslam/frontend.hpp"

namespace pslam {

struct TooFewMatches : Error {
    TooFewMatches() : Error("need at least 3 correspondences") {}
};
struct DegenerateGeometry : Error {
    DegenerateGeometry() : Error("correspondences are collinear") {}
};

struct FeatureConfig {
    float fast_threshold = 0.06f;   // intensity contrast on [0,1] images
    int nms_radius = 4;
    int max_per_plane = 80;
    int match_max_hamming = 64;
    double match_max_ratio = 0.8;   // best / second-best distance
    int ransac_iterations = 200;
    double ransac_inlier_tol = 0.03;  // meters
    uint32_t seed = 1;
};

struct Keypoint3d {
    Eigen::Vector2d pixel;
    Eigen::Vector3d point;  // camera frame, from depth
    std::array<uint64_t, 4> descriptor{};
    int plane_index = 0;  // segment label
    float response = 0.0f;
};

int hamming_distance(const std::array<uint64_t, 4>& a, const std::array<uint64_t, 4>& b);

struct MatchSet {
    struct Pair {
        Keypoint3d current;
        Keypoint3d previous;
    };
    std::vector<Pair> pairs;
    int current_plane = 0;
    int previous_plane = 0;

    size_t size() const { return pairs.size(); }
    void append(const MatchSet& other) {
        pairs.insert(pairs.end(), other.pairs.begin(), other.pairs.end());
    }
};

/// FAST-9/16 corners with oriented binary descriptors, limited per plane by response.
std::vector<Keypoint3d> detect_and_describe(const RgbdFrame& frame,
                                            const SegmentLabelMap& labels,
                                            const FeatureConfig& cfg = {});

/// Mutual nearest-neighbour Hamming matching with distance and ratio gates.
MatchSet match(const std::vector<Keypoint3d>& current, const std::vector<Keypoint3d>& previous,
               const FeatureConfig& cfg = {});

struct RansacResult {
    RigidTransform transform;      // previous ~= T * current, refit on inliers
    RigidTransform minimal_model;  // best 3-point hypothesis before the refit
    std::vector<int> inliers;      // indices into matches.pairs
};

/// 3-point Procrustes hypotheses, inliers by 3D residual, final refit on inliers.
RansacResult ransac_rigid(const MatchSet& matches, int iterations, double inlier_tol,
                          uint32_t seed = 1);

/// Where plane-to-plane matches come from; lets tests swap in ground truth.
class CorrespondenceProvider {
  public:
    virtual ~CorrespondenceProvider() = default;
    virtual void begin_pair(const RgbdFrame& prev, const SegmentedFrame& prev_seg,
                            const RgbdFrame& cur, const SegmentedFrame& cur_seg) = 0;
    virtual MatchSet match_planes(int cur_label, int prev_label) = 0;
};

/// The real detector/matcher provider.
class FeatureMatcher final : public CorrespondenceProvider {
  public:
    explicit FeatureMatcher(const FeatureConfig& cfg = {}) : cfg_(cfg) {}
    void begin_pair(const RgbdFrame& prev, const SegmentedFrame& prev_seg,
                    const RgbdFrame& cur, const SegmentedFrame& cur_seg) override;
    MatchSet match_planes(int cur_label, int prev_label) override;

  private:
    FeatureConfig cfg_;
    double prev_timestamp_ = -1.0, cur_timestamp_ = -1.0;
    std::vector<Keypoint3d> prev_keypoints_, cur_keypoints_;
};

}  // namespace pslam
