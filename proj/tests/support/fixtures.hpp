#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "spseg/image.hpp"

namespace spseg::testing {

/// Synthetic single-object scene: an ellipse of one color on a background of
/// another, plus i.i.d. Gaussian noise per channel, quantized to 8 bits.
struct BlobScene {
    RasterImage image;
    BinaryMask mask;
    double color_distance = 0.0;  // Euclidean RGB distance fg vs bg
};

/// Deterministic for a given seed. Colors are redrawn until their RGB
/// distance is at least `min_distance`.
BlobScene make_blob(std::uint32_t seed, int size = 128, double noise = 0.05, double min_distance = 0.3);

/// Two vertical bands of the given colors, split at width / 2.
RasterImage make_bands(int width, int height, const Rgb& left, const Rgb& right);

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace spseg::testing
