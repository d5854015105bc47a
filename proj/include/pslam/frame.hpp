#pragma once

#include <map>
#include <utility>
#include <vector>

#include "pslam/geometry.hpp"
#include "pslam/image.hpp"

namespace pslam {

struct BadDimensions : Error {
    using Error::Error;
};

struct RgbdFrame {
    FloatImage intensity;  // [0, 1]
    FloatImage depth;      // meters, 0 = invalid
    double timestamp = 0.0;
    Intrinsics intrinsics;

    bool valid_depth(int x, int y) const { return depth.at(x, y) > 0.0f; }
};

/// Per-pixel segment labels: 0 invalid, 1..P planes, P+1..P+S super-pixels.
struct SegmentLabelMap {
    LabelImage labels;
    int plane_count = 0;
    int superpixel_count = 0;

    int segment_count() const { return plane_count + superpixel_count; }
    bool is_plane_label(int label) const { return label >= 1 && label <= plane_count; }
};

struct ConnectivityEdge {
    int a = 0, b = 0;         // segment labels, a < b
    int boundary_length = 0;  // shared 4-connected pixel pairs
};

struct ConnectivityGraph {
    std::vector<ConnectivityEdge> edges;
};

struct FramePyramid {
    struct Level {
        FloatImage intensity;
        FloatImage depth;
        Intrinsics intrinsics;
    };
    std::vector<Level> levels;  // [0] is full resolution
};

/// Box-mean intensity, median-of-valid depth. Width and height must divide by 2^(levels-1).
FramePyramid build_pyramid(const RgbdFrame& frame, int levels);

/// Nearest-neighbor label downsampling matching the pyramid level layout.
LabelImage downsample_labels(const LabelImage& labels, int level);

struct ConnectivityGraphs {
    ConnectivityGraph planes;     // E_p: plane-plane edges
    ConnectivityGraph nonplanar;  // E_np: edges with >= 1 super-pixel endpoint
};

/// Segments are adjacent when they share at least `min_boundary` 4-connected pixel pairs.
ConnectivityGraphs build_connectivity(const SegmentLabelMap& labels, int min_boundary = 8);

struct SegmentPixelCounts {
    std::vector<int> per_segment;  // indexed by label - 1
    int total = 0;
};

/// Valid-depth pixel counts N_i per segment and their total N.
SegmentPixelCounts segment_pixel_counts(const SegmentLabelMap& labels, const FloatImage& depth);

}  // namespace pslam
