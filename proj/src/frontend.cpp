#include "pslam/frontend.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace pslam {

namespace {

bool depth_in_range(float z, const FrontendConfig& cfg) {
    return z >= cfg.min_depth && z <= cfg.max_depth;
}

// Incremental total-least-squares plane fit over accumulated points.
struct PlaneAccumulator {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
    int count = 0;

    void add(const Eigen::Vector3d& p) {
        sum += p;
        outer += p * p.transpose();
        ++count;
    }
    Eigen::Vector3d centroid() const { return sum / count; }

    Plane fit() const {
        const Eigen::Vector3d c = centroid();
        const Eigen::Matrix3d cov = outer / count - c * c.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig;
        eig.computeDirect(cov);
        Eigen::Vector3d n = eig.eigenvectors().col(0);
        // Camera-facing orientation: supporting points satisfy n.p < 0, d > 0.
        if (n.dot(c) > 0) n = -n;
        return Plane(n, -n.dot(c));
    }
};

}  // namespace

NormalMap estimate_normals(const RgbdFrame& frame, const FrontendConfig& cfg) {
    const int W = frame.depth.width(), H = frame.depth.height();
    NormalMap result;
    result.normals = Image<Eigen::Vector3f>(W, H, Eigen::Vector3f::Zero());
    result.curvature = FloatImage(W, H, 1.0f);

    // Cache backprojections once.
    Image<Eigen::Vector3f> points(W, H, Eigen::Vector3f::Zero());
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const float z = frame.depth.at(x, y);
            if (!depth_in_range(z, cfg)) continue;
            points.at(x, y) = backproject(frame.intrinsics, {double(x), double(y)}, z)
                                  .cast<float>();
        }

    for (int y = 2; y < H - 2; ++y)
        for (int x = 2; x < W - 2; ++x) {
            const float z0 = frame.depth.at(x, y);
            if (!depth_in_range(z0, cfg)) continue;
            const float gap = 0.05f + 0.04f * z0;

            Eigen::Vector3f sum = Eigen::Vector3f::Zero();
            Eigen::Matrix3f outer = Eigen::Matrix3f::Zero();
            int n = 0;
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx) {
                    const float z = frame.depth.at(x + dx, y + dy);
                    if (!depth_in_range(z, cfg) || std::abs(z - z0) > gap) continue;
                    const Eigen::Vector3f& p = points.at(x + dx, y + dy);
                    sum += p;
                    outer += p * p.transpose();
                    ++n;
                }
            if (n < 8) continue;

            const Eigen::Vector3f c = sum / n;
            const Eigen::Matrix3f cov = outer / n - c * c.transpose();
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3f> eig;
            eig.computeDirect(cov);
            Eigen::Vector3f normal = eig.eigenvectors().col(0);
            if (normal.dot(c) > 0) normal = -normal;
            result.normals.at(x, y) = normal;
            const float trace = eig.eigenvalues().sum();
            result.curvature.at(x, y) =
                trace > 1e-12f ? eig.eigenvalues()(0) / trace : 1.0f;
        }
    return result;
}

PlaneExtraction extract_planes(const RgbdFrame& frame, const FrontendConfig& cfg,
                               const NormalMap* precomputed) {
    const int W = frame.depth.width(), H = frame.depth.height();
    NormalMap local;
    if (!precomputed) local = estimate_normals(frame, cfg);
    const NormalMap& normals = precomputed ? *precomputed : local;
    const double cos_gate = std::cos(cfg.normal_angle_deg * M_PI / 180.0);

    std::vector<Eigen::Vector3d> points(static_cast<size_t>(W) * H, Eigen::Vector3d::Zero());
    std::vector<uint8_t> usable(static_cast<size_t>(W) * H, 0);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const float z = frame.depth.at(x, y);
            if (!depth_in_range(z, cfg)) continue;
            points[y * W + x] = backproject(frame.intrinsics, {double(x), double(y)}, z);
            usable[y * W + x] = 1;
        }

    // Seeds ordered by curvature, lowest first; index breaks ties deterministically.
    std::vector<int> seeds;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            if (usable[y * W + x] && normals.valid(x, y) &&
                normals.curvature.at(x, y) <= cfg.seed_max_curvature)
                seeds.push_back(y * W + x);
    std::stable_sort(seeds.begin(), seeds.end(), [&](int a, int b) {
        return normals.curvature.at(a % W, a / W) < normals.curvature.at(b % W, b / W);
    });

    std::vector<uint8_t> claimed(static_cast<size_t>(W) * H, 0);
    PlaneExtraction out;

    for (int seed : seeds) {
        if (claimed[seed]) continue;
        const int sx = seed % W, sy = seed / W;

        Plane plane(normals.normals.at(sx, sy).cast<double>().normalized(), 0.0);
        plane.offset = -plane.normal.dot(points[seed]);

        PlaneAccumulator acc;
        std::vector<int> members;
        std::deque<int> queue{seed};
        claimed[seed] = 1;
        int since_refit = 0;

        while (!queue.empty()) {
            const int idx = queue.front();
            queue.pop_front();
            members.push_back(idx);
            acc.add(points[idx]);
            if (++since_refit >= cfg.refit_interval) {
                plane = acc.fit();
                since_refit = 0;
            }

            const int px = idx % W, py = idx / W;
            const int nbr[4][2] = {{px + 1, py}, {px - 1, py}, {px, py + 1}, {px, py - 1}};
            for (const auto& [qx, qy] : nbr) {
                if (qx < 0 || qx >= W || qy < 0 || qy >= H) continue;
                const int qi = qy * W + qx;
                if (claimed[qi] || !usable[qi] || !normals.valid(qx, qy)) continue;
                const Eigen::Vector3d qn = normals.normals.at(qx, qy).cast<double>();
                if (qn.dot(plane.normal) < cos_gate) continue;
                if (std::abs(plane.signed_distance(points[qi])) > cfg.plane_dist) continue;
                claimed[qi] = 1;
                queue.push_back(qi);
            }
        }

        if (static_cast<int>(members.size()) < cfg.min_plane_size) {
            // Too small: release only into the non-planar pool, not for reseeding.
            continue;
        }

        plane = acc.fit();

        // Trim stragglers beyond 3x RMS, refitting until stable.
        auto trim = [&](bool refit_after) {
            for (int iter = 0; iter < 5; ++iter) {
                double sq = 0;
                for (int idx : members) {
                    const double d = plane.signed_distance(points[idx]);
                    sq += d * d;
                }
                const double rms = std::sqrt(sq / members.size());
                const double gate = std::max(3.0 * rms, 1e-9);
                std::vector<int> kept;
                kept.reserve(members.size());
                for (int idx : members)
                    if (std::abs(plane.signed_distance(points[idx])) <= gate)
                        kept.push_back(idx);
                if (kept.size() == members.size()) break;
                members = std::move(kept);
                if (!refit_after) break;
                PlaneAccumulator refit;
                for (int idx : members) refit.add(points[idx]);
                plane = refit.fit();
            }
        };
        trim(true);
        if (static_cast<int>(members.size()) < cfg.min_plane_size) continue;

        // Inflation: adjacent valid pixels on the fitted plane join even where
        // the normal map is undefined (image border, window dropouts).
        std::deque<int> frontier(members.begin(), members.end());
        while (!frontier.empty()) {
            const int idx = frontier.front();
            frontier.pop_front();
            const int px = idx % W, py = idx / W;
            const int nbr[4][2] = {{px + 1, py}, {px - 1, py}, {px, py + 1}, {px, py - 1}};
            for (const auto& [qx, qy] : nbr) {
                if (qx < 0 || qx >= W || qy < 0 || qy >= H) continue;
                const int qi = qy * W + qx;
                if (claimed[qi] || !usable[qi]) continue;
                if (std::abs(plane.signed_distance(points[qi])) > cfg.plane_dist) continue;
                claimed[qi] = 1;
                members.push_back(qi);
                frontier.push_back(qi);
            }
        }
        trim(false);

        ExtractedPlane ep;
        ep.plane = plane;
        double sq = 0;
        Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
        for (int idx : members) {
            const double d = plane.signed_distance(points[idx]);
            sq += d * d;
            centroid += points[idx];
        }
        ep.inlier_rms = std::sqrt(sq / members.size());
        ep.centroid = centroid / members.size();
        std::sort(members.begin(), members.end());
        ep.pixels = std::move(members);
        out.planes.push_back(std::move(ep));
    }

    out.nonplanar_mask = ByteImage(W, H, 0);
    for (int i = 0; i < W * H; ++i)
        if (usable[i]) out.nonplanar_mask.at(i % W, i / W) = 1;
    for (const auto& plane : out.planes)
        for (int idx : plane.pixels) out.nonplanar_mask.at(idx % W, idx / W) = 0;
    return out;
}

namespace {

struct SlicCenter {
    double x = 0, y = 0, intensity = 0, depth = 0;
    bool alive = true;
};

}  // namespace

std::vector<SuperPixel> oversegment_nonplanar(const RgbdFrame& frame, const ByteImage& mask,
                                              const FrontendConfig& cfg) {
    const int W = frame.depth.width(), H = frame.depth.height();
    const int S = cfg.superpixel_spacing;

    std::vector<int> masked;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            if (mask.at(x, y)) masked.push_back(y * W + x);
    if (masked.empty()) return {};

    // Grid seeding: nearest masked pixel to each grid node within its cell.
    std::vector<SlicCenter> centers;
    for (int gy = S / 2; gy < H; gy += S)
        for (int gx = S / 2; gx < W; gx += S) {
            int best = -1;
            double best_d2 = 1e18;
            for (int y = std::max(0, gy - S / 2); y < std::min(H, gy + S / 2 + 1); ++y)
                for (int x = std::max(0, gx - S / 2); x < std::min(W, gx + S / 2 + 1); ++x) {
                    if (!mask.at(x, y)) continue;
                    const double d2 = double(x - gx) * (x - gx) + double(y - gy) * (y - gy);
                    if (d2 < best_d2) {
                        best_d2 = d2;
                        best = y * W + x;
                    }
                }
            if (best < 0) continue;
            SlicCenter c;
            c.x = best % W;
            c.y = best / W;
            c.intensity = frame.intensity.at(best % W, best / W);
            c.depth = frame.depth.at(best % W, best / W);
            centers.push_back(c);
        }
    if (centers.empty()) return {};

    std::vector<int> assignment(static_cast<size_t>(W) * H, -1);
    std::vector<double> best_dist(static_cast<size_t>(W) * H, 0.0);

    auto feature_dist = [&](const SlicCenter& c, int x, int y) {
        const double dx = c.x - x, dy = c.y - y;
        const double di = cfg.beta_intensity * (c.intensity - frame.intensity.at(x, y));
        const double dz = cfg.beta_depth * (c.depth - frame.depth.at(x, y));
        return dx * dx + dy * dy + di * di + dz * dz;
    };

    for (int iter = 0; iter < cfg.superpixel_iterations; ++iter) {
        for (int idx : masked) {
            assignment[idx] = -1;
            best_dist[idx] = 1e18;
        }
        for (size_t ci = 0; ci < centers.size(); ++ci) {
            const SlicCenter& c = centers[ci];
            const int x0 = std::max(0, int(c.x) - S), x1 = std::min(W, int(c.x) + S + 1);
            const int y0 = std::max(0, int(c.y) - S), y1 = std::min(H, int(c.y) + S + 1);
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) {
                    if (!mask.at(x, y)) continue;
                    const double d = feature_dist(c, x, y);
                    const int idx = y * W + x;
                    if (d < best_dist[idx]) {
                        best_dist[idx] = d;
                        assignment[idx] = static_cast<int>(ci);
                    }
                }
        }
        // Pixels outside every window: nearest center spatially.
        for (int idx : masked) {
            if (assignment[idx] >= 0) continue;
            const int x = idx % W, y = idx / W;
            double best = 1e18;
            for (size_t ci = 0; ci < centers.size(); ++ci) {
                const double dx = centers[ci].x - x, dy = centers[ci].y - y;
                if (dx * dx + dy * dy < best) {
                    best = dx * dx + dy * dy;
                    assignment[idx] = static_cast<int>(ci);
                }
            }
        }

        std::vector<Eigen::Vector4d> sums(centers.size(), Eigen::Vector4d::Zero());
        std::vector<int> counts(centers.size(), 0);
        for (int idx : masked) {
            const int x = idx % W, y = idx / W;
            sums[assignment[idx]] +=
                Eigen::Vector4d(x, y, frame.intensity.at(x, y), frame.depth.at(x, y));
            counts[assignment[idx]]++;
        }
        for (size_t ci = 0; ci < centers.size(); ++ci) {
            if (counts[ci] == 0) {
                centers[ci].alive = false;
                continue;
            }
            const Eigen::Vector4d mean = sums[ci] / counts[ci];
            centers[ci] = {mean[0], mean[1], mean[2], mean[3], true};
        }
    }

    // Connectivity enforcement: per cluster keep the largest component; other
    // components merge into the neighbour cluster with the longest shared border.
    std::vector<int> component(static_cast<size_t>(W) * H, -1);
    struct Component {
        int cluster;
        std::vector<int> pixels;
    };
    std::vector<Component> comps;
    for (int idx : masked) {
        if (component[idx] >= 0) continue;
        Component comp;
        comp.cluster = assignment[idx];
        std::deque<int> queue{idx};
        component[idx] = static_cast<int>(comps.size());
        while (!queue.empty()) {
            const int i = queue.front();
            queue.pop_front();
            comp.pixels.push_back(i);
            const int x = i % W, y = i / W;
            const int nbr[4][2] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
            for (const auto& [qx, qy] : nbr) {
                if (qx < 0 || qx >= W || qy < 0 || qy >= H) continue;
                const int qi = qy * W + qx;
                if (component[qi] >= 0 || !mask.at(qx, qy)) continue;
                if (assignment[qi] != comp.cluster) continue;
                component[qi] = static_cast<int>(comps.size());
                queue.push_back(qi);
            }
        }
        comps.push_back(std::move(comp));
    }

    std::vector<int> main_component(centers.size(), -1);
    for (size_t k = 0; k < comps.size(); ++k) {
        const int c = comps[k].cluster;
        if (main_component[c] < 0 ||
            comps[k].pixels.size() > comps[main_component[c]].pixels.size())
            main_component[c] = static_cast<int>(k);
    }

    // Orphans join the neighbouring component with the longest shared border;
    // isolated orphans stay as their own super-pixel.
    std::vector<int> final_group(comps.size());
    std::iota(final_group.begin(), final_group.end(), 0);
    for (size_t k = 0; k < comps.size(); ++k) {
        if (static_cast<int>(k) == main_component[comps[k].cluster]) continue;
        std::map<int, int> border;  // component -> contact count
        for (int idx : comps[k].pixels) {
            const int x = idx % W, y = idx / W;
            const int nbr[4][2] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
            for (const auto& [qx, qy] : nbr) {
                if (qx < 0 || qx >= W || qy < 0 || qy >= H) continue;
                const int qc = component[qy * W + qx];
                if (qc >= 0 && qc != static_cast<int>(k)) border[qc]++;
            }
        }
        int best = -1, best_count = 0;
        for (const auto& [comp_id, count] : border)
            if (count > best_count) {
                best_count = count;
                best = comp_id;
            }
        if (best >= 0) final_group[k] = best;
    }
    // Resolve chains (orphan merged into an orphan).
    for (size_t k = 0; k < comps.size(); ++k) {
        int g = final_group[k];
        int hops = 0;
        while (final_group[g] != g && hops++ < 64) g = final_group[g];
        final_group[k] = g;
    }

    std::map<int, SuperPixel> grouped;
    for (size_t k = 0; k < comps.size(); ++k)
        for (int idx : comps[k].pixels) grouped[final_group[k]].pixels.push_back(idx);

    std::vector<SuperPixel> out;
    for (auto& [group, sp] : grouped) {
        std::sort(sp.pixels.begin(), sp.pixels.end());
        double sx = 0, sy = 0, si = 0, sz = 0;
        for (int idx : sp.pixels) {
            const int x = idx % W, y = idx / W;
            sx += x;
            sy += y;
            si += frame.intensity.at(x, y);
            sz += frame.depth.at(x, y);
        }
        const double n = static_cast<double>(sp.pixels.size());
        sp.centroid_2d = {sx / n, sy / n};
        sp.mean_intensity = static_cast<float>(si / n);
        sp.mean_depth = static_cast<float>(sz / n);
        out.push_back(std::move(sp));
    }
    return out;
}

SegmentLabelMap assemble_segment_map(const std::vector<ExtractedPlane>& planes,
                                     const std::vector<SuperPixel>& superpixels, int width,
                                     int height) {
    SegmentLabelMap map;
    map.labels = LabelImage(width, height, 0);
    map.plane_count = static_cast<int>(planes.size());
    map.superpixel_count = static_cast<int>(superpixels.size());

    int label = 1;
    auto paint = [&](const std::vector<int>& pixels) {
        for (int idx : pixels) {
            int32_t& cell = map.labels.at(idx % width, idx / width);
            if (cell != 0) throw OverlapError();
            cell = label;
        }
        ++label;
    };
    for (const auto& plane : planes) paint(plane.pixels);
    for (const auto& sp : superpixels) paint(sp.pixels);
    return map;
}

SegmentedFrame segment_frame(const RgbdFrame& frame, const FrontendConfig& cfg) {
    SegmentedFrame seg;
    seg.normals = estimate_normals(frame, cfg);
    PlaneExtraction extraction = extract_planes(frame, cfg, &seg.normals);
    seg.superpixels = oversegment_nonplanar(frame, extraction.nonplanar_mask, cfg);
    seg.planes = std::move(extraction.planes);
    seg.labels = assemble_segment_map(seg.planes, seg.superpixels, frame.depth.width(),
                                      frame.depth.height());
    seg.graphs = build_connectivity(seg.labels);
    return seg;
}

}  // namespace pslam
