#include "pslam/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "pslam/geometry.hpp"

namespace pslam {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

// Decodes into 8-bit gray rows (channels=1) or raw 16-bit gray rows (channels=0 marker).
// All C++ allocation happens before setjmp so a libpng longjmp skips no destructors.
bool decode_png(const std::string& path, bool want_depth16, int& width, int& height,
                std::vector<uint8_t>& bytes8, std::vector<uint16_t>& words16, int& channels) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw Error("cannot open PNG for reading: " + path);

    PngReader r;
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) throw Error("png_create_read_struct failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info) throw Error("png_create_info_struct failed");

    png_init_io(r.png, file.get());
    png_read_info(r.png, r.info);

    png_uint_32 w, h;
    int bit_depth, color_type;
    png_get_IHDR(r.png, r.info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);
    width = static_cast<int>(w);
    height = static_cast<int>(h);

    if (want_depth16) {
        if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY)
            throw Error("expected 16-bit grayscale PNG: " + path);
        png_set_swap(r.png);
        words16.assign(static_cast<size_t>(width) * height, 0);
        channels = 0;
    } else {
        if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
        if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
        if (bit_depth == 16) png_set_strip_16(r.png);
        if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(r.png);
        png_read_update_info(r.png, r.info);
        channels = png_get_channels(r.png, r.info);
        if (channels != 1 && channels != 3) throw Error("unsupported PNG layout: " + path);
        bytes8.assign(static_cast<size_t>(width) * height * channels, 0);
    }

    std::vector<png_bytep> rows(height);
    const size_t stride = want_depth16 ? static_cast<size_t>(width) * 2
                                       : static_cast<size_t>(width) * channels;
    for (int y = 0; y < height; ++y)
        rows[y] = want_depth16 ? reinterpret_cast<png_bytep>(words16.data()) + y * stride
                               : bytes8.data() + y * stride;

    if (setjmp(png_jmpbuf(r.png))) return false;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);
    return true;
}

bool encode_png(const std::string& path, int width, int height, int bit_depth,
                std::vector<png_bytep>& rows) {
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw Error("cannot open PNG for writing: " + path);

    PngWriter w;
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!w.png) throw Error("png_create_write_struct failed");
    w.info = png_create_info_struct(w.png);
    if (!w.info) throw Error("png_create_info_struct failed");

    if (setjmp(png_jmpbuf(w.png))) return false;
    png_init_io(w.png, file.get());
    png_set_IHDR(w.png, w.info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    if (bit_depth == 16) png_set_swap(w.png);
    png_write_image(w.png, rows.data());
    png_write_end(w.png, nullptr);
    return true;
}

}  // namespace

FloatImage read_intensity_png(const std::string& path) {
    int width, height, channels;
    std::vector<uint8_t> bytes;
    std::vector<uint16_t> words;
    if (!decode_png(path, false, width, height, bytes, words, channels))
        throw Error("PNG decode failed: " + path);

    FloatImage img(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const uint8_t* p = &bytes[(static_cast<size_t>(y) * width + x) * channels];
            float v;
            if (channels == 1)
                v = p[0] / 255.0f;
            else
                v = (0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2]) / 255.0f;
            img.at(x, y) = v;
        }
    return img;
}

Image<uint16_t> read_gray16_png(const std::string& path) {
    int width, height, channels;
    std::vector<uint8_t> bytes;
    std::vector<uint16_t> words;
    if (!decode_png(path, true, width, height, bytes, words, channels))
        throw Error("PNG decode failed: " + path);
    Image<uint16_t> img(width, height);
    std::copy(words.begin(), words.end(), img.data());
    return img;
}

FloatImage read_depth_png(const std::string& path) {
    const Image<uint16_t> raw = read_gray16_png(path);
    FloatImage depth(raw.width(), raw.height());
    for (int y = 0; y < raw.height(); ++y)
        for (int x = 0; x < raw.width(); ++x) depth.at(x, y) = raw.at(x, y) / 1000.0f;
    return depth;
}

ByteImage read_gray8_png(const std::string& path) {
    int width, height, channels;
    std::vector<uint8_t> bytes;
    std::vector<uint16_t> words;
    if (!decode_png(path, false, width, height, bytes, words, channels))
        throw Error("PNG decode failed: " + path);
    if (channels != 1) throw Error("expected 8-bit grayscale PNG: " + path);
    ByteImage img(width, height);
    std::copy(bytes.begin(), bytes.end(), img.data());
    return img;
}

void write_gray8_png(const std::string& path, const ByteImage& img) {
    std::vector<png_bytep> rows(img.height());
    ByteImage copy = img;
    for (int y = 0; y < img.height(); ++y) rows[y] = copy.data() + static_cast<size_t>(y) * img.width();
    if (!encode_png(path, img.width(), img.height(), 8, rows))
        throw Error("PNG encode failed: " + path);
}

void write_gray16_png(const std::string& path, const Image<uint16_t>& img) {
    Image<uint16_t> copy = img;
    std::vector<png_bytep> rows(img.height());
    for (int y = 0; y < img.height(); ++y)
        rows[y] = reinterpret_cast<png_bytep>(copy.data() + static_cast<size_t>(y) * img.width());
    if (!encode_png(path, img.width(), img.height(), 16, rows))
        throw Error("PNG encode failed: " + path);
}

void write_depth16_png(const std::string& path, const FloatImage& depth_m) {
    Image<uint16_t> raw(depth_m.width(), depth_m.height());
    for (int y = 0; y < depth_m.height(); ++y)
        for (int x = 0; x < depth_m.width(); ++x) {
            const double mm = std::round(depth_m.at(x, y) * 1000.0);
            raw.at(x, y) = static_cast<uint16_t>(std::min(65535.0, std::max(0.0, mm)));
        }
    write_gray16_png(path, raw);
}

}  // namespace pslam
