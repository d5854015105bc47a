#include <doctest.h>

#include <random>

#include "pslam/frame.hpp"

using namespace pslam;

namespace {

RgbdFrame make_frame(int w, int h, float intensity, float depth) {
    RgbdFrame f;
    f.intensity = FloatImage(w, h, intensity);
    f.depth = FloatImage(w, h, depth);
    f.intrinsics = {260, 260, (w - 1) / 2.0, (h - 1) / 2.0, w, h};
    return f;
}

}  // namespace

TEST_CASE("pyramid keeps constant intensity constant") {
    const RgbdFrame f = make_frame(320, 240, 0.5f, 2.0f);
    const FramePyramid pyr = build_pyramid(f, 3);
    REQUIRE(pyr.levels.size() == 3);
    CHECK(pyr.levels[2].intensity.width() == 80);
    CHECK(pyr.levels[2].intensity.height() == 60);
    for (const auto& level : pyr.levels)
        for (float v : level.intensity) CHECK(v == doctest::Approx(0.5f));
}

TEST_CASE("depth downsampling is the median of valid entries") {
    RgbdFrame f = make_frame(2, 2, 0.5f, 0.0f);
    f.depth.at(0, 0) = 1.0f;
    f.depth.at(1, 0) = 1.2f;
    const FramePyramid pyr = build_pyramid(f, 2);
    CHECK(pyr.levels[1].depth.at(0, 0) == doctest::Approx(1.1f));
}

TEST_CASE("all-invalid depth stays invalid") {
    const RgbdFrame f = make_frame(4, 4, 0.1f, 0.0f);
    const FramePyramid pyr = build_pyramid(f, 2);
    for (float v : pyr.levels[1].depth) CHECK(v == 0.0f);
}

TEST_CASE("pyramid rejects non-divisible dimensions") {
    const RgbdFrame f = make_frame(322, 240, 0.5f, 1.0f);
    CHECK_THROWS_AS(build_pyramid(f, 3), BadDimensions);
}

TEST_CASE("pyramid level dimensions halve exactly") {
    const RgbdFrame f = make_frame(320, 240, 0.5f, 1.0f);
    const FramePyramid pyr = build_pyramid(f, 3);
    for (size_t l = 0; l < pyr.levels.size(); ++l) {
        CHECK(pyr.levels[l].intensity.width() == 320 >> l);
        CHECK(pyr.levels[l].intensity.height() == 240 >> l);
        CHECK(pyr.levels[l].intrinsics.width == 320 >> l);
    }
}

TEST_CASE("left/right split yields one edge with full boundary") {
    SegmentLabelMap map;
    map.labels = LabelImage(40, 30, 1);
    for (int y = 0; y < 30; ++y)
        for (int x = 20; x < 40; ++x) map.labels.at(x, y) = 2;
    map.plane_count = 2;

    const ConnectivityGraphs g = build_connectivity(map);
    REQUIRE(g.planes.edges.size() == 1);
    CHECK(g.planes.edges[0].a == 1);
    CHECK(g.planes.edges[0].b == 2);
    CHECK(g.planes.edges[0].boundary_length == 30);
    CHECK(g.nonplanar.edges.empty());
}

TEST_CASE("diagonal corner contact is not adjacency") {
    SegmentLabelMap map;
    map.labels = LabelImage(20, 20, 0);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) map.labels.at(x, y) = 1;
    for (int y = 10; y < 20; ++y)
        for (int x = 10; x < 20; ++x) map.labels.at(x, y) = 2;
    map.plane_count = 2;

    const ConnectivityGraphs g = build_connectivity(map);
    CHECK(g.planes.edges.empty());
    CHECK(g.nonplanar.edges.empty());
}

TEST_CASE("checkerboard of four segments has the four side edges") {
    SegmentLabelMap map;
    map.labels = LabelImage(32, 32, 0);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            map.labels.at(x, y) = 1 + (x >= 16) + 2 * (y >= 16);
    map.plane_count = 2;  // labels 3, 4 are super-pixels
    map.superpixel_count = 2;

    const ConnectivityGraphs g = build_connectivity(map);
    // Hand enumeration: (1,2), (1,3), (2,4), (3,4); no diagonals (1,4) or (2,3).
    CHECK(g.planes.edges.size() == 1);
    CHECK(g.nonplanar.edges.size() == 3);
    for (const auto& e : g.nonplanar.edges) CHECK(e.a + e.b != 5);
}

TEST_CASE("sub-threshold contact is ignored") {
    SegmentLabelMap map;
    map.labels = LabelImage(20, 20, 0);
    for (int y = 0; y < 5; ++y) {
        map.labels.at(9, y) = 1;
        map.labels.at(10, y) = 2;
    }
    map.plane_count = 2;
    CHECK(build_connectivity(map, 8).planes.edges.empty());
    CHECK(build_connectivity(map, 5).planes.edges.size() == 1);
}

TEST_CASE("connectivity is stable under label permutation") {
    std::mt19937 rng(9);
    SegmentLabelMap map;
    map.labels = LabelImage(64, 64, 0);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) map.labels.at(x, y) = 1 + (x / 16);
    map.plane_count = 4;

    const ConnectivityGraphs g = build_connectivity(map);

    // Swap labels 2 and 3 and verify the same structure appears under renaming.
    SegmentLabelMap swapped = map;
    for (auto& v : swapped.labels)
        v = (v == 2) ? 3 : (v == 3) ? 2 : v;
    const ConnectivityGraphs h = build_connectivity(swapped);
    CHECK(g.planes.edges.size() == h.planes.edges.size());
    auto renamed = [](int v) { return (v == 2) ? 3 : (v == 3) ? 2 : v; };
    for (const auto& e : g.planes.edges) {
        bool found = false;
        for (const auto& f : h.planes.edges) {
            const int a = std::min(renamed(e.a), renamed(e.b));
            const int b = std::max(renamed(e.a), renamed(e.b));
            if (f.a == a && f.b == b && f.boundary_length == e.boundary_length) found = true;
        }
        CHECK(found);
    }
}

TEST_CASE("pixel counts at QVGA") {
    SegmentLabelMap map;
    map.labels = LabelImage(320, 240, 1);
    map.plane_count = 1;
    FloatImage depth(320, 240, 2.0f);

    SUBCASE("all valid") {
        const SegmentPixelCounts c = segment_pixel_counts(map, depth);
        CHECK(c.total == 76800);
        CHECK(c.per_segment[0] == 76800);
    }
    SUBCASE("half invalid halves the count") {
        for (int y = 0; y < 240; ++y)
            for (int x = 0; x < 160; ++x) depth.at(x, y) = 0.0f;
        CHECK(segment_pixel_counts(map, depth).total == 38400);
    }
}

TEST_CASE("pixel counts match a brute-force tally") {
    std::mt19937 rng(4);
    std::uniform_int_distribution<int> label(0, 5);
    std::uniform_real_distribution<float> d(0.0f, 3.0f);
    SegmentLabelMap map;
    map.labels = LabelImage(50, 40);
    map.plane_count = 2;
    map.superpixel_count = 3;
    FloatImage depth(50, 40);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 50; ++x) {
            map.labels.at(x, y) = label(rng);
            depth.at(x, y) = (rng() % 3 == 0) ? 0.0f : d(rng);
        }

    const SegmentPixelCounts c = segment_pixel_counts(map, depth);
    int total = 0;
    for (int s = 1; s <= 5; ++s) {
        int n = 0;
        for (int y = 0; y < 40; ++y)
            for (int x = 0; x < 50; ++x)
                if (map.labels.at(x, y) == s && depth.at(x, y) > 0) ++n;
        CHECK(c.per_segment[s - 1] == n);
        total += n;
    }
    CHECK(c.total == total);
}
