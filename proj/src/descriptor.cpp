#include "spseg/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spseg/errors.hpp"

namespace spseg {

std::array<double, kColorDims> color_moments(std::span<const Rgb> pixels) {
    if (pixels.empty()) throw EmptyRegion("color moments of an empty region");
    const double n = static_cast<double>(pixels.size());
    std::array<double, kColorDims> out{};
    for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (const auto& p : pixels) sum += p[c];
        const double mean = sum / n;
        double m2 = 0.0, m3 = 0.0;
        for (const auto& p : pixels) {
            const double d = p[c] - mean;
            m2 += d * d;
            m3 += d * d * d;
        }
        out[3 * c] = mean;
        out[3 * c + 1] = std::sqrt(m2 / n);
        out[3 * c + 2] = std::cbrt(m3 / n);
    }
    return out;
}

int orientation_bin(double gx, double gy) {
    // Octant b covers angles [45b, 45(b+1)) degrees.
    if (gy == 0.0) return gx >= 0.0 ? 0 : 4;
    const double ax = std::abs(gx), ay = std::abs(gy);
    if (gy > 0.0) {
        if (gx > 0.0) return ay < ax ? 0 : 1;
        if (gx == 0.0) return 2;
        return ax < ay ? 2 : 3;
    }
    if (gx < 0.0) return ay < ax ? 4 : 5;
    if (gx == 0.0) return 6;
    return ax < ay ? 6 : 7;
}

std::vector<std::uint8_t> texture_codes(const LabImage& lab, const TextureParams& params) {
    const int w = lab.width;
    const int h = lab.height;
    auto lum = [&](int x, int y) {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return lab.data[3 * lab.index(x, y)];
    };

    std::vector<std::uint8_t> codes(lab.pixel_count());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = ((lum(x + 1, y - 1) + 2.0 * lum(x + 1, y) + lum(x + 1, y + 1)) -
                               (lum(x - 1, y - 1) + 2.0 * lum(x - 1, y) + lum(x - 1, y + 1))) / 8.0;
            const double gy = ((lum(x - 1, y + 1) + 2.0 * lum(x, y + 1) + lum(x + 1, y + 1)) -
                               (lum(x - 1, y - 1) + 2.0 * lum(x, y - 1) + lum(x + 1, y - 1))) / 8.0;
            const double lap = lum(x + 1, y) + lum(x - 1, y) + lum(x, y + 1) + lum(x, y - 1) - 4.0 * lum(x, y);
            const double mag = std::sqrt(gx * gx + gy * gy);
            const int mag_bin = mag < params.t1 ? 0 : (mag < params.t2 ? 1 : 2);
            const int code = orientation_bin(gx, gy) * (kMagnitudeBins * 2) + mag_bin * 2 + (lap >= 0.0 ? 1 : 0);
            codes[lab.index(x, y)] = static_cast<std::uint8_t>(code);
        }
    }
    return codes;
}

Matrix describe_all(const SuperpixelPartition& p, const RasterImage& img, std::span<const std::uint8_t> codes) {
    if (codes.size() != p.pixel_count() || img.pixel_count() != p.pixel_count())
        throw DimensionMismatch("descriptor inputs disagree in size");
    Matrix features(static_cast<std::size_t>(p.size()), kDescriptorDims);
    std::vector<Rgb> colors;
    for (int i = 0; i < p.size(); ++i) {
        const auto& pixels = p.superpixels[i].pixels;
        if (pixels.empty()) throw EmptyRegion("superpixel " + std::to_string(i) + " has no pixels");
        colors.clear();
        std::array<double, kTextureBins> hist{};
        for (int idx : pixels) {
            colors.push_back(img.at(static_cast<std::size_t>(idx)));
            hist[codes[idx]] += 1.0;
        }
        const auto moments = color_moments(colors);
        auto row = features.row(i);
        std::copy(moments.begin(), moments.end(), row.begin());
        const double inv = 1.0 / static_cast<double>(pixels.size());
        for (int b = 0; b < kTextureBins; ++b) row[kColorDims + b] = hist[b] * inv;
    }
    return features;
}

}  // namespace spseg
