#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace spseg {

using Rgb = std::array<double, 3>;
using Lab = std::array<double, 3>;

/// Interleaved three-channel grid, row-major. Used for both RGB in [0,1]
/// and CIELAB; the alias tells the two apart at call sites.
struct ColorGrid {
    int width = 0;
    int height = 0;
    std::vector<double> data;  // width * height * 3

    ColorGrid() = default;
    ColorGrid(int w, int h);

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }

    std::array<double, 3> at(std::size_t i) const { return {data[3 * i], data[3 * i + 1], data[3 * i + 2]}; }
    std::array<double, 3> at(int x, int y) const { return at(index(x, y)); }
    void set(std::size_t i, const std::array<double, 3>& v);
    void set(int x, int y, const std::array<double, 3>& v) { set(index(x, y), v); }
};

/// RGB image with channels in [0,1].
struct RasterImage : ColorGrid {
    using ColorGrid::ColorGrid;
};

/// CIELAB image: L in [0,100], a/b nominally in [-128,127].
struct LabImage : ColorGrid {
    using ColorGrid::ColorGrid;
};

struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // 1 = foreground

    BinaryMask() = default;
    BinaryMask(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

    std::size_t pixel_count() const { return data.size(); }
    std::size_t foreground_count() const;
};

/// Per-pixel label ids in the contiguous range [0, num_labels).
struct LabelMap {
    int width = 0;
    int height = 0;
    int num_labels = 0;
    std::vector<std::int32_t> data;

    LabelMap() = default;
    LabelMap(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

    std::size_t pixel_count() const { return data.size(); }
};

/// Replaces each id by its rank among the distinct ids and sets num_labels.
/// Already contiguous maps are unchanged.
void compact_labels(LabelMap& lm);

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace spseg
