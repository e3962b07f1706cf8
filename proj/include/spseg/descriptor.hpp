#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "spseg/image.hpp"
#include "spseg/presegment.hpp"

namespace spseg {

inline constexpr int kColorDims = 9;
inline constexpr int kTextureBins = 48;
inline constexpr int kDescriptorDims = kColorDims + kTextureBins;

inline constexpr int kOrientationBins = 8;
inline constexpr int kMagnitudeBins = 3;

struct TextureParams {
    double t1 = 5.0;   // flat / moderate gradient boundary, L units per pixel
    double t2 = 20.0;  // moderate / strong
};

/// Per channel mean, standard deviation and signed cube root of the third
/// central moment, ordered (mu_r, sd_r, s_r, mu_g, ...). Throws EmptyRegion.
std::array<double, kColorDims> color_moments(std::span<const Rgb> pixels);

/// Octant of atan2(gy, gx) mapped to [0, 2pi), decided by exact comparisons.
/// The zero vector maps to 0.
int orientation_bin(double gx, double gy);

/// Derivative code per pixel in [0,48): orientation * 6 + magnitude * 2 +
/// (laplacian >= 0). Computed on L with replicated borders; gradients are
/// Sobel responses scaled to units per pixel.
std::vector<std::uint8_t> texture_codes(const LabImage& lab, const TextureParams& params = {});

/// M x 57 descriptor matrix, row i = color moments ++ normalized code histogram.
Matrix describe_all(const SuperpixelPartition& p, const RasterImage& img,
                    std::span<const std::uint8_t> codes);

}  // namespace spseg
