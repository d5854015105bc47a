#pragma once

#include <vector>

#include "pslam/frame.hpp"

namespace pslam {

struct OverlapError : Error {
    OverlapError() : Error("segment pixel sets overlap") {}
};

struct FrontendConfig {
    double max_depth = 12.0;           // meters; beyond this depth is ignored
    double min_depth = 0.1;
    double normal_angle_deg = 8.0;     // region growing gate vs region normal
    double plane_dist = 0.02;          // point-to-plane gate, meters
    int min_plane_size = 300;          // pixels at QVGA
    int refit_interval = 200;          // refit plane every N grown pixels
    double seed_max_curvature = 0.02;  // PCA surface-variation gate for seeds
    int superpixel_spacing = 20;       // grid seed spacing, pixels
    int superpixel_iterations = 10;
    double beta_intensity = 50.0;      // feature scale for intensity
    double beta_depth = 150.0;         // feature scale for depth
};

struct NormalMap {
    Image<Eigen::Vector3f> normals;  // zero vector = invalid
    FloatImage curvature;            // surface variation, lambda_min / trace
    bool valid(int x, int y) const { return normals.at(x, y).squaredNorm() > 0.5f; }
};

/// Per-pixel normals from 5x5 depth-window PCA, oriented toward the camera.
NormalMap estimate_normals(const RgbdFrame& frame, const FrontendConfig& cfg);

struct ExtractedPlane {
    Plane plane;                  // camera frame, camera-facing normal, d > 0
    std::vector<int> pixels;      // linear indices, sorted
    Eigen::Vector3d centroid;
    double inlier_rms = 0.0;
};

struct PlaneExtraction {
    std::vector<ExtractedPlane> planes;
    ByteImage nonplanar_mask;  // valid-depth pixels not claimed by any plane
};

/// Pass a precomputed normal map to avoid re-estimating it.
PlaneExtraction extract_planes(const RgbdFrame& frame, const FrontendConfig& cfg,
                               const NormalMap* normals = nullptr);

struct SuperPixel {
    std::vector<int> pixels;  // linear indices, sorted
    Eigen::Vector2d centroid_2d;
    float mean_intensity = 0.0f;
    float mean_depth = 0.0f;
};

std::vector<SuperPixel> oversegment_nonplanar(const RgbdFrame& frame, const ByteImage& mask,
                                              const FrontendConfig& cfg);

/// Planes take labels 1..P, super-pixels P+1..P+S. Throws OverlapError on collisions.
SegmentLabelMap assemble_segment_map(const std::vector<ExtractedPlane>& planes,
                                     const std::vector<SuperPixel>& superpixels, int width,
                                     int height);

struct SegmentedFrame {
    SegmentLabelMap labels;
    std::vector<ExtractedPlane> planes;
    std::vector<SuperPixel> superpixels;
    ConnectivityGraphs graphs;
    NormalMap normals;
};

/// Full frame decomposition: planes, super-pixels, label map, connectivity.
SegmentedFrame segment_frame(const RgbdFrame& frame, const FrontendConfig& cfg);

}  // namespace pslam
