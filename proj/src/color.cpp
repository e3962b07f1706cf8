#include "spseg/color.hpp"

#include <cmath>

namespace spseg {
namespace {

constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};

// Inverse of kRgbToXyz.
constexpr double kXyzToRgb[3][3] = {
    {3.2404542, -1.5371385, -0.4985314},
    {-0.9692660, 1.8760108, 0.0415560},
    {0.0556434, -0.2040259, 1.0572252},
};

constexpr double kWhite[3] = {
    kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2],
    kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2],
    kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2],
};

constexpr double kDelta = 6.0 / 29.0;

double decompand(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double compand(double c) {
    return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) {
    return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double f) {
    return f > kDelta ? f * f * f : 3.0 * kDelta * kDelta * (f - 4.0 / 29.0);
}

}  // namespace

Lab srgb_to_lab(const Rgb& rgb) {
    const double lin[3] = {decompand(rgb[0]), decompand(rgb[1]), decompand(rgb[2])};
    double f[3];
    for (int r = 0; r < 3; ++r) {
        const double xyz = kRgbToXyz[r][0] * lin[0] + kRgbToXyz[r][1] * lin[1] + kRgbToXyz[r][2] * lin[2];
        f[r] = lab_f(xyz / kWhite[r]);
    }
    return {116.0 * f[1] - 16.0, 500.0 * (f[0] - f[1]), 200.0 * (f[1] - f[2])};
}

Rgb lab_to_srgb(const Lab& lab) {
    const double fy = (lab[0] + 16.0) / 116.0;
    const double fx = fy + lab[1] / 500.0;
    const double fz = fy - lab[2] / 200.0;
    const double xyz[3] = {kWhite[0] * lab_f_inv(fx), kWhite[1] * lab_f_inv(fy), kWhite[2] * lab_f_inv(fz)};
    Rgb rgb{};
    for (int r = 0; r < 3; ++r)
        rgb[r] = compand(kXyzToRgb[r][0] * xyz[0] + kXyzToRgb[r][1] * xyz[1] + kXyzToRgb[r][2] * xyz[2]);
    return rgb;
}

LabImage rgb_to_lab(const RasterImage& img) {
    LabImage lab(img.width, img.height);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) lab.set(i, srgb_to_lab(img.at(i)));
    return lab;
}

RasterImage lab_to_rgb(const LabImage& lab) {
    RasterImage img(lab.width, lab.height);
    for (std::size_t i = 0; i < lab.pixel_count(); ++i) img.set(i, lab_to_srgb(lab.at(i)));
    return img;
}

}  // namespace spseg
