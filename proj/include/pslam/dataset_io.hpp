#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pslam/frame.hpp"

namespace pslam {

struct ParseError : Error {
    using Error::Error;
};

/// Directory layout: rgb/NNNNNN.png (8-bit), depth/NNNNNN.png (16-bit mm),
/// intrinsics.txt with one line "fx fy cx cy width height".
class DatasetReader {
  public:
    explicit DatasetReader(const std::string& directory, double fps = 30.0);

    const Intrinsics& intrinsics() const { return intrinsics_; }
    const std::vector<int>& frame_indices() const { return indices_; }
    size_t frame_count() const { return indices_.size(); }

    RgbdFrame load(size_t i) const;

    /// Instance mask for frame i if mask/NNNNNN.png exists.
    std::optional<ByteImage> load_mask(size_t i) const;

    double timestamp(size_t i) const { return indices_.at(i) / fps_; }

  private:
    std::string dir_;
    double fps_;
    Intrinsics intrinsics_;
    std::vector<int> indices_;
};

class DatasetWriter {
  public:
    DatasetWriter(const std::string& directory, const Intrinsics& K, bool with_masks = false);

    void write_frame(int index, const FloatImage& intensity, const FloatImage& depth) const;
    void write_mask(int index, const ByteImage& mask) const;

    const std::string& directory() const { return dir_; }

  private:
    std::string dir_;
};

Intrinsics read_intrinsics_file(const std::string& path);
void write_intrinsics_file(const std::string& path, const Intrinsics& K);

std::string frame_filename(int index);  // "NNNNNN.png"

}  // namespace pslam
