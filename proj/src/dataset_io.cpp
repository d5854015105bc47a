#include "pslam/dataset_io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pslam/png_io.hpp"

namespace fs = std::filesystem;

namespace pslam {

std::string frame_filename(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06d.png", index);
    return buf;
}

Intrinsics read_intrinsics_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open intrinsics file: " + path);
    Intrinsics K;
    std::string line;
    std::getline(in, line);
    std::istringstream ss(line);
    if (!(ss >> K.fx >> K.fy >> K.cx >> K.cy >> K.width >> K.height))
        throw ParseError("malformed intrinsics line: " + line);
    if (!K.valid()) throw ParseError("invalid intrinsics values in " + path);
    return K;
}

void write_intrinsics_file(const std::string& path, const Intrinsics& K) {
    std::ofstream out(path);
    out.precision(10);
    out << K.fx << " " << K.fy << " " << K.cx << " " << K.cy << " " << K.width << " "
        << K.height << "\n";
}

DatasetReader::DatasetReader(const std::string& directory, double fps)
    : dir_(directory), fps_(fps) {
    if (!fs::is_directory(dir_)) throw Error("dataset directory missing: " + dir_);
    intrinsics_ = read_intrinsics_file(dir_ + "/intrinsics.txt");

    const fs::path depth_dir = fs::path(dir_) / "depth";
    if (!fs::is_directory(depth_dir)) throw Error("dataset has no depth/ directory: " + dir_);
    for (const auto& entry : fs::directory_iterator(depth_dir)) {
        if (entry.path().extension() != ".png") continue;
        try {
            indices_.push_back(std::stoi(entry.path().stem().string()));
        } catch (const std::exception&) {
            throw ParseError("non-numeric frame name: " + entry.path().string());
        }
    }
    std::sort(indices_.begin(), indices_.end());
    if (indices_.empty()) throw Error("dataset contains no frames: " + dir_);
}

RgbdFrame DatasetReader::load(size_t i) const {
    const int index = indices_.at(i);
    RgbdFrame frame;
    frame.intensity = read_intensity_png(dir_ + "/rgb/" + frame_filename(index));
    frame.depth = read_depth_png(dir_ + "/depth/" + frame_filename(index));
    frame.intrinsics = intrinsics_;
    frame.timestamp = timestamp(i);
    if (!frame.intensity.same_size(intrinsics_.width, intrinsics_.height) ||
        !frame.depth.same_size(intrinsics_.width, intrinsics_.height))
        throw Error("frame dimensions disagree with intrinsics: " + dir_);
    return frame;
}

std::optional<ByteImage> DatasetReader::load_mask(size_t i) const {
    const fs::path path = fs::path(dir_) / "mask" / frame_filename(indices_.at(i));
    if (!fs::exists(path)) return std::nullopt;
    return read_gray8_png(path.string());
}

DatasetWriter::DatasetWriter(const std::string& directory, const Intrinsics& K, bool with_masks)
    : dir_(directory) {
    fs::create_directories(fs::path(dir_) / "rgb");
    fs::create_directories(fs::path(dir_) / "depth");
    if (with_masks) fs::create_directories(fs::path(dir_) / "mask");
    write_intrinsics_file(dir_ + "/intrinsics.txt", K);
}

void DatasetWriter::write_frame(int index, const FloatImage& intensity,
                                const FloatImage& depth) const {
    ByteImage gray(intensity.width(), intensity.height());
    for (int y = 0; y < intensity.height(); ++y)
        for (int x = 0; x < intensity.width(); ++x) {
            const float v = std::clamp(intensity.at(x, y), 0.0f, 1.0f);
            gray.at(x, y) = static_cast<uint8_t>(std::lround(v * 255.0f));
        }
    write_gray8_png(dir_ + "/rgb/" + frame_filename(index), gray);
    write_depth16_png(dir_ + "/depth/" + frame_filename(index), depth);
}

void DatasetWriter::write_mask(int index, const ByteImage& mask) const {
    write_gray8_png(dir_ + "/mask/" + frame_filename(index), mask);
}

}  // namespace pslam
