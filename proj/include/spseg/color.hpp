#pragma once

#include "spseg/image.hpp"

namespace spseg {

// sRGB (D65) <-> CIELAB. The white point is taken as the XYZ image of
// sRGB white so that neutral colors land exactly on a = b = 0.

Lab srgb_to_lab(const Rgb& rgb);
Rgb lab_to_srgb(const Lab& lab);

LabImage rgb_to_lab(const RasterImage& img);
RasterImage lab_to_rgb(const LabImage& lab);

}  // namespace spseg
