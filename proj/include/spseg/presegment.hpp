#pragma once

#include <vector>

#include "spseg/image.hpp"

namespace spseg {

struct SlicParams {
    int superpixels = 400;          // requested count k
    double compactness = 10.0;      // m
    int max_iters = 10;
    double min_region_frac = 0.25;  // of H*W/k

    /// Throws InvalidParams when a field is out of range.
    void validate() const;
};

struct Superpixel {
    std::vector<int> pixels;  // raster indices, ascending
    double cx = 0.0;
    double cy = 0.0;
    Lab mean_lab{};
    Rgb mean_rgb{};  // C_i
};

/// Per-pixel superpixel ids plus per-superpixel statistics.
struct SuperpixelPartition {
    int width = 0;
    int height = 0;
    std::vector<int> labels;            // ids in [0, size())
    std::vector<Superpixel> superpixels;

    int size() const { return static_cast<int>(superpixels.size()); }
    std::size_t pixel_count() const { return labels.size(); }
};

/// SLIC over-segmentation followed by enforce_connectivity and
/// superpixel_stats (mean Lab only; call superpixel_stats with the RGB image
/// to fill C_i). Fully deterministic.
SuperpixelPartition slic(const LabImage& lab, const SlicParams& params);

/// Merges every 4-connected fragment that is smaller than
/// min_region_frac * H*W / k, or that is not the largest fragment of its
/// original id, into the adjacent fragment with the most pixels (ties to the
/// smaller fragment id). Fragments are visited in raster order of their first
/// pixel. Output ids are contiguous in raster order of first appearance.
/// Pixel lists are rebuilt; other statistics are left zeroed.
SuperpixelPartition enforce_connectivity(const SuperpixelPartition& p, const SlicParams& params);

/// Rebuilds pixel lists and fills centroid, mean Lab, and mean RGB.
void superpixel_stats(SuperpixelPartition& p, const RasterImage& img, const LabImage& lab);

/// Builds a partition (pixel lists only) from a raw id map; ids are compacted.
SuperpixelPartition partition_from_labels(int width, int height, std::vector<int> labels);

}  // namespace spseg
