#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace pslam {

/// Row-major 2D buffer. Depth images use 0 for invalid pixels.
template <typename T>
class Image {
  public:
    Image() = default;
    Image(int width, int height, T fill = T{})
        : width_(width), height_(height), data_(static_cast<size_t>(width) * height, fill) {}

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return data_.empty(); }
    size_t size() const { return data_.size(); }

    T& at(int x, int y) {
        assert(contains(x, y));
        return data_[static_cast<size_t>(y) * width_ + x];
    }
    const T& at(int x, int y) const {
        assert(contains(x, y));
        return data_[static_cast<size_t>(y) * width_ + x];
    }

    bool contains(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

    bool same_size(int w, int h) const { return width_ == w && height_ == h; }

  private:
    int width_ = 0, height_ = 0;
    std::vector<T> data_;
};

using FloatImage = Image<float>;
using LabelImage = Image<int32_t>;
using ByteImage = Image<uint8_t>;

/// Bilinear sample of an intensity image; caller guarantees in-bounds coordinates.
inline float bilinear(const FloatImage& img, double x, double y) {
    const int x0 = static_cast<int>(x);
    const int y0 = static_cast<int>(y);
    const double ax = x - x0;
    const double ay = y - y0;
    const int x1 = x0 + 1 < img.width() ? x0 + 1 : x0;
    const int y1 = y0 + 1 < img.height() ? y0 + 1 : y0;
    const double top = (1.0 - ax) * img.at(x0, y0) + ax * img.at(x1, y0);
    const double bot = (1.0 - ax) * img.at(x0, y1) + ax * img.at(x1, y1);
    return static_cast<float>((1.0 - ay) * top + ay * bot);
}

}  // namespace pslam
