#pragma once

#include <filesystem>

#include "spseg/image.hpp"

namespace spseg {

/// Loads an 8-bit PNG or a binary Netpbm file (P5/P6). Grayscale inputs are
/// replicated to three channels. Channels are scaled to [0,1] by maxval.
///
/// Throws IoError when the file cannot be read and FormatError when the
/// contents are not a supported encoding.
RasterImage load_image(const std::filesystem::path& path);

/// Writes an 8-bit RGB image. `.png` selects PNG, anything else binary PPM.
void save_image(const RasterImage& img, const std::filesystem::path& path);

/// Loads a grayscale raster and marks pixels above half of maxval as
/// foreground. Color rasters are reduced by averaging their channels.
BinaryMask load_mask(const std::filesystem::path& path);

/// Writes a mask as 8-bit grayscale (0 / 255).
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

/// Writes raw label ids as 16-bit grayscale: PNG for `.png`, otherwise a P5
/// PGM with maxval 65535 (big-endian samples). Throws OverflowError when
/// num_labels exceeds 65536.
void save_label_map(const LabelMap& lm, const std::filesystem::path& path);

/// Reads a label raster of any bit depth. Ids are compacted to a contiguous
/// range by rank, which is the identity for maps written by save_label_map.
LabelMap load_label_map(const std::filesystem::path& path);

}  // namespace spseg
