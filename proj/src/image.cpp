#include "spseg/image.hpp"

#include <algorithm>
#include <vector>

namespace spseg {

ColorGrid::ColorGrid(int w, int h)
    : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0.0) {}

void ColorGrid::set(std::size_t i, const std::array<double, 3>& v) {
    data[3 * i] = v[0];
    data[3 * i + 1] = v[1];
    data[3 * i + 2] = v[2];
}

std::size_t BinaryMask::foreground_count() const {
    return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
}

void compact_labels(LabelMap& lm) {
    std::vector<std::int32_t> ids(lm.data);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (auto& id : lm.data)
        id = static_cast<std::int32_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    lm.num_labels = static_cast<int>(ids.size());
}

}  // namespace spseg
