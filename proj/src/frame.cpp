#include "pslam/frame.hpp"

#include <algorithm>
#include <array>

namespace pslam {

namespace {

FloatImage halve_intensity(const FloatImage& src) {
    FloatImage dst(src.width() / 2, src.height() / 2);
    for (int y = 0; y < dst.height(); ++y)
        for (int x = 0; x < dst.width(); ++x) {
            const float s = src.at(2 * x, 2 * y) + src.at(2 * x + 1, 2 * y) +
                            src.at(2 * x, 2 * y + 1) + src.at(2 * x + 1, 2 * y + 1);
            dst.at(x, y) = 0.25f * s;
        }
    return dst;
}

FloatImage halve_depth(const FloatImage& src) {
    FloatImage dst(src.width() / 2, src.height() / 2);
    for (int y = 0; y < dst.height(); ++y)
        for (int x = 0; x < dst.width(); ++x) {
            std::array<float, 4> v{src.at(2 * x, 2 * y), src.at(2 * x + 1, 2 * y),
                                   src.at(2 * x, 2 * y + 1), src.at(2 * x + 1, 2 * y + 1)};
            int n = 0;
            for (float d : v)
                if (d > 0.0f) std::swap(v[n++], d);
            if (n == 0) {
                dst.at(x, y) = 0.0f;
                continue;
            }
            std::sort(v.begin(), v.begin() + n);
            dst.at(x, y) = (n % 2 == 1) ? v[n / 2] : 0.5f * (v[n / 2 - 1] + v[n / 2]);
        }
    return dst;
}

}  // namespace

FramePyramid build_pyramid(const RgbdFrame& frame, int levels) {
    if (levels < 1) throw BadDimensions("pyramid needs at least one level");
    const int div = 1 << (levels - 1);
    if (frame.intensity.width() % div != 0 || frame.intensity.height() % div != 0)
        throw BadDimensions("image dimensions not divisible by 2^(levels-1)");
    if (!frame.depth.same_size(frame.intensity.width(), frame.intensity.height()))
        throw BadDimensions("intensity and depth dimensions differ");

    FramePyramid pyr;
    pyr.levels.resize(levels);
    pyr.levels[0] = {frame.intensity, frame.depth, frame.intrinsics};
    for (int l = 1; l < levels; ++l) {
        pyr.levels[l].intensity = halve_intensity(pyr.levels[l - 1].intensity);
        pyr.levels[l].depth = halve_depth(pyr.levels[l - 1].depth);
        pyr.levels[l].intrinsics = halve_intrinsics(pyr.levels[l - 1].intrinsics);
    }
    return pyr;
}

LabelImage downsample_labels(const LabelImage& labels, int level) {
    LabelImage out = labels;
    for (int l = 0; l < level; ++l) {
        LabelImage next(out.width() / 2, out.height() / 2);
        for (int y = 0; y < next.height(); ++y)
            for (int x = 0; x < next.width(); ++x) next.at(x, y) = out.at(2 * x, 2 * y);
        out = std::move(next);
    }
    return out;
}

ConnectivityGraphs build_connectivity(const SegmentLabelMap& map, int min_boundary) {
    std::map<std::pair<int, int>, int> counts;
    const LabelImage& L = map.labels;
    for (int y = 0; y < L.height(); ++y)
        for (int x = 0; x < L.width(); ++x) {
            const int a = L.at(x, y);
            if (a == 0) continue;
            if (x + 1 < L.width()) {
                const int b = L.at(x + 1, y);
                if (b != 0 && b != a) counts[{std::min(a, b), std::max(a, b)}]++;
            }
            if (y + 1 < L.height()) {
                const int b = L.at(x, y + 1);
                if (b != 0 && b != a) counts[{std::min(a, b), std::max(a, b)}]++;
            }
        }

    ConnectivityGraphs graphs;
    for (const auto& [pair, n] : counts) {
        if (n < min_boundary) continue;
        ConnectivityEdge e{pair.first, pair.second, n};
        if (map.is_plane_label(e.a) && map.is_plane_label(e.b))
            graphs.planes.edges.push_back(e);
        else
            graphs.nonplanar.edges.push_back(e);
    }
    return graphs;
}

SegmentPixelCounts segment_pixel_counts(const SegmentLabelMap& map, const FloatImage& depth) {
    SegmentPixelCounts counts;
    counts.per_segment.assign(map.segment_count(), 0);
    for (int y = 0; y < map.labels.height(); ++y)
        for (int x = 0; x < map.labels.width(); ++x) {
            const int label = map.labels.at(x, y);
            if (label == 0 || depth.at(x, y) <= 0.0f) continue;
            counts.per_segment[label - 1]++;
            counts.total++;
        }
    return counts;
}

}  // namespace pslam
