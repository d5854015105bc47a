#include "pslam/correspondence.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

namespace pslam {

namespace {

// Bresenham circle of radius 3, clockwise from the top.
constexpr int kCircle[16][2] = {{0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0},  {3, 1},
                                {2, 2},  {1, 3},  {0, 3},  {-1, 3}, {-2, 2}, {-3, 1},
                                {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}};

constexpr int kMargin = 20;       // descriptor pattern stays inside after rotation
constexpr int kPatternRadius = 13;
constexpr int kOrientationRadius = 15;

// splitmix64, the portable RNG behind the descriptor pattern.
uint64_t splitmix64(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// 256 comparison point pairs, Gaussian-distributed over the patch (BRIEF G-II
// recipe, sigma = patch/5), generated once from a fixed seed.
struct ComparisonPattern {
    std::array<std::array<int8_t, 4>, 256> pairs;

    ComparisonPattern() {
        uint64_t state = 0x5eedULL;
        auto gaussian = [&]() {
            // Box-Muller on splitmix64 uniforms; only the cosine branch.
            const double u1 = (splitmix64(state) >> 11) * 0x1.0p-53 + 1e-12;
            const double u2 = (splitmix64(state) >> 11) * 0x1.0p-53;
            return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        };
        const double sigma = 2.0 * kPatternRadius / 5.0;
        for (auto& pair : pairs) {
            do {
                for (int i = 0; i < 4; ++i) {
                    const double v = std::clamp(gaussian() * sigma, -13.0, 13.0);
                    pair[i] = static_cast<int8_t>(std::lround(v));
                }
            } while (pair[0] == pair[2] && pair[1] == pair[3]);
        }
    }
};

const ComparisonPattern& pattern() {
    static const ComparisonPattern p;
    return p;
}

// 5x5 box blur; descriptor comparisons sample the smoothed image.
FloatImage box_blur5(const FloatImage& src) {
    const int W = src.width(), H = src.height();
    FloatImage tmp(W, H), dst(W, H);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            float s = 0;
            for (int d = -2; d <= 2; ++d) s += src.at(std::clamp(x + d, 0, W - 1), y);
            tmp.at(x, y) = s / 5.0f;
        }
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            float s = 0;
            for (int d = -2; d <= 2; ++d) s += tmp.at(x, std::clamp(y + d, 0, H - 1));
            dst.at(x, y) = s / 5.0f;
        }
    return dst;
}

float corner_response(const FloatImage& img, int x, int y, float t, bool& is_corner) {
    const float center = img.at(x, y);
    int sign[16];
    float diff[16];
    for (int i = 0; i < 16; ++i) {
        const float v = img.at(x + kCircle[i][0], y + kCircle[i][1]);
        diff[i] = v - center;
        sign[i] = diff[i] > t ? 1 : (diff[i] < -t ? -1 : 0);
    }
    // Longest wrapping run of one sign.
    is_corner = false;
    float response = 0;
    for (int dir = -1; dir <= 1; dir += 2) {
        int run = 0, best_run = 0;
        float acc = 0, best_acc = 0;
        for (int i = 0; i < 32; ++i) {
            if (sign[i % 16] == dir) {
                ++run;
                acc += std::abs(diff[i % 16]);
                if (run > best_run) {
                    best_run = run;
                    best_acc = acc;
                }
                if (run >= 16) break;
            } else {
                run = 0;
                acc = 0;
            }
        }
        if (best_run >= 9) {
            is_corner = true;
            response = std::max(response, best_acc);
        }
    }
    return response;
}

}  // namespace

int hamming_distance(const std::array<uint64_t, 4>& a, const std::array<uint64_t, 4>& b) {
    int d = 0;
    for (int i = 0; i < 4; ++i) d += std::popcount(a[i] ^ b[i]);
    return d;
}

std::vector<Keypoint3d> detect_and_describe(const RgbdFrame& frame,
                                            const SegmentLabelMap& labels,
                                            const FeatureConfig& cfg) {
    const int W = frame.intensity.width(), H = frame.intensity.height();
    FloatImage response(W, H, 0.0f);

    for (int y = kMargin; y < H - kMargin; ++y)
        for (int x = kMargin; x < W - kMargin; ++x) {
            if (!labels.is_plane_label(labels.labels.at(x, y))) continue;
            if (frame.depth.at(x, y) <= 0) continue;
            bool is_corner = false;
            const float r = corner_response(frame.intensity, x, y, cfg.fast_threshold,
                                            is_corner);
            if (is_corner) response.at(x, y) = r;
        }

    const FloatImage smoothed = box_blur5(frame.intensity);
    std::vector<std::vector<Keypoint3d>> per_plane(labels.plane_count + 1);

    for (int y = kMargin; y < H - kMargin; ++y)
        for (int x = kMargin; x < W - kMargin; ++x) {
            const float r = response.at(x, y);
            if (r <= 0) continue;
            bool is_max = true;
            for (int dy = -cfg.nms_radius; dy <= cfg.nms_radius && is_max; ++dy)
                for (int dx = -cfg.nms_radius; dx <= cfg.nms_radius; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const float other = response.at(x + dx, y + dy);
                    if (other > r || (other == r && (dy < 0 || (dy == 0 && dx < 0)))) {
                        is_max = false;
                        break;
                    }
                }
            if (!is_max) continue;

            Keypoint3d kp;
            kp.pixel = {double(x), double(y)};
            kp.point = backproject(frame.intrinsics, kp.pixel, frame.depth.at(x, y));
            kp.plane_index = labels.labels.at(x, y);
            kp.response = r;

            // Orientation by intensity centroid over a disc.
            double m10 = 0, m01 = 0;
            for (int dy = -kOrientationRadius; dy <= kOrientationRadius; ++dy)
                for (int dx = -kOrientationRadius; dx <= kOrientationRadius; ++dx) {
                    if (dx * dx + dy * dy > kOrientationRadius * kOrientationRadius) continue;
                    const float v = frame.intensity.at(x + dx, y + dy);
                    m10 += dx * v;
                    m01 += dy * v;
                }
            const double theta = std::atan2(m01, m10);
            const double c = std::cos(theta), s = std::sin(theta);

            for (int bit = 0; bit < 256; ++bit) {
                const auto& p = pattern().pairs[bit];
                const int ax = x + static_cast<int>(std::lround(c * p[0] - s * p[1]));
                const int ay = y + static_cast<int>(std::lround(s * p[0] + c * p[1]));
                const int bx = x + static_cast<int>(std::lround(c * p[2] - s * p[3]));
                const int by = y + static_cast<int>(std::lround(s * p[2] + c * p[3]));
                if (smoothed.at(ax, ay) < smoothed.at(bx, by))
                    kp.descriptor[bit / 64] |= (uint64_t(1) << (bit % 64));
            }
            per_plane[kp.plane_index].push_back(std::move(kp));
        }

    std::vector<Keypoint3d> out;
    for (auto& group : per_plane) {
        std::stable_sort(group.begin(), group.end(), [](const Keypoint3d& a, const Keypoint3d& b) {
            return a.response > b.response;
        });
        if (static_cast<int>(group.size()) > cfg.max_per_plane)
            group.resize(cfg.max_per_plane);
        // Restore scan order within the plane for reproducible downstream slicing.
        std::stable_sort(group.begin(), group.end(), [](const Keypoint3d& a, const Keypoint3d& b) {
            return a.pixel.y() == b.pixel.y() ? a.pixel.x() < b.pixel.x()
                                              : a.pixel.y() < b.pixel.y();
        });
        out.insert(out.end(), group.begin(), group.end());
    }
    return out;
}

MatchSet match(const std::vector<Keypoint3d>& current, const std::vector<Keypoint3d>& previous,
               const FeatureConfig& cfg) {
    MatchSet result;
    if (current.empty() || previous.empty()) return result;

    auto nearest2 = [&](const Keypoint3d& kp, const std::vector<Keypoint3d>& pool, int& best,
                        int& best_d, int& second_d) {
        best = -1;
        best_d = 1 << 20;
        second_d = 1 << 20;
        for (size_t i = 0; i < pool.size(); ++i) {
            const int d = hamming_distance(kp.descriptor, pool[i].descriptor);
            if (d < best_d) {
                second_d = best_d;
                best_d = d;
                best = static_cast<int>(i);
            } else if (d < second_d) {
                second_d = d;
            }
        }
    };

    for (size_t i = 0; i < current.size(); ++i) {
        int j, dij, second;
        nearest2(current[i], previous, j, dij, second);
        if (j < 0 || dij > cfg.match_max_hamming) continue;
        if (second < (1 << 20) && dij > cfg.match_max_ratio * second) continue;

        int i_back, dji, second_back;
        nearest2(previous[j], current, i_back, dji, second_back);
        if (i_back != static_cast<int>(i)) continue;

        result.pairs.push_back({current[i], previous[j]});
    }
    return result;
}

RansacResult ransac_rigid(const MatchSet& matches, int iterations, double inlier_tol,
                          uint32_t seed) {
    const size_t n = matches.size();
    if (n < 3) throw TooFewMatches();

    std::vector<Eigen::Vector3d> cur(n), prev(n);
    for (size_t i = 0; i < n; ++i) {
        cur[i] = matches.pairs[i].current.point;
        prev[i] = matches.pairs[i].previous.point;
    }

    std::mt19937 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, n - 1);

    RansacResult best;
    size_t best_count = 0;
    bool any_sample = false;

    for (int iter = 0; iter < iterations; ++iter) {
        size_t a = pick(rng), b = pick(rng), c = pick(rng);
        if (a == b || b == c || a == c) continue;
        const Eigen::Vector3d ab = cur[b] - cur[a], ac = cur[c] - cur[a];
        if (ab.cross(ac).norm() < 1e-10) continue;
        any_sample = true;

        const RigidTransform T = rigid_align({cur[a], cur[b], cur[c]},
                                             {prev[a], prev[b], prev[c]});
        size_t count = 0;
        for (size_t i = 0; i < n; ++i)
            if ((prev[i] - T.apply(cur[i])).norm() < inlier_tol) ++count;
        if (count > best_count) {
            best_count = count;
            best.transform = T;
        }
    }
    if (!any_sample) throw DegenerateGeometry();
    if (best_count < 3) throw DegenerateGeometry();

    // Refit on the best inlier set.
    std::vector<Eigen::Vector3d> in_cur, in_prev;
    for (size_t i = 0; i < n; ++i)
        if ((prev[i] - best.transform.apply(cur[i])).norm() < inlier_tol) {
            in_cur.push_back(cur[i]);
            in_prev.push_back(prev[i]);
        }
    best.transform = rigid_align(in_cur, in_prev);
    best.inliers.clear();
    for (size_t i = 0; i < n; ++i)
        if ((prev[i] - best.transform.apply(cur[i])).norm() < inlier_tol)
            best.inliers.push_back(static_cast<int>(i));
    return best;
}

void FeatureMatcher::begin_pair(const RgbdFrame& prev, const SegmentedFrame& prev_seg,
                                const RgbdFrame& cur, const SegmentedFrame& cur_seg) {
    if (prev.timestamp == cur_timestamp_ && !cur_keypoints_.empty()) {
        prev_keypoints_ = std::move(cur_keypoints_);
    } else {
        prev_keypoints_ = detect_and_describe(prev, prev_seg.labels, cfg_);
    }
    cur_keypoints_ = detect_and_describe(cur, cur_seg.labels, cfg_);
    prev_timestamp_ = prev.timestamp;
    cur_timestamp_ = cur.timestamp;
}

MatchSet FeatureMatcher::match_planes(int cur_label, int prev_label) {
    std::vector<Keypoint3d> cur, prev;
    for (const auto& kp : cur_keypoints_)
        if (kp.plane_index == cur_label) cur.push_back(kp);
    for (const auto& kp : prev_keypoints_)
        if (kp.plane_index == prev_label) prev.push_back(kp);
    MatchSet m = match(cur, prev, cfg_);
    m.current_plane = cur_label;
    m.previous_plane = prev_label;
    return m;
}

}  // namespace pslam
