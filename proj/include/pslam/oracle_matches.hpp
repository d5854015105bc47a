#pragma once

#include "pslam/correspondence.hpp"
#include "pslam/synthworld.hpp"

namespace pslam::synth {

/// Correspondence provider backed by ground truth: samples plane pixels, moves
/// them through the true per-instance motion, and emits exact matches. Lets the
/// motion solvers be tested independently of feature quality.
class OracleMatcher final : public CorrespondenceProvider {
  public:
    OracleMatcher(const RenderedSequence& seq, double fps, int max_per_plane = 60)
        : seq_(seq), fps_(fps), max_per_plane_(max_per_plane) {}

    void begin_pair(const RgbdFrame& prev, const SegmentedFrame& prev_seg,
                    const RgbdFrame& cur, const SegmentedFrame& cur_seg) override;
    MatchSet match_planes(int cur_label, int prev_label) override;

    /// Camera-to-camera map of points on instance `k` (0 = static) between the frames.
    RigidTransform true_egocentric(int instance) const;

  private:
    const RenderedSequence& seq_;
    double fps_;
    int max_per_plane_;
    int prev_index_ = -1, cur_index_ = -1;
    const SegmentedFrame* cur_seg_ = nullptr;
};

}  // namespace pslam::synth
