#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace spseg::testing {

BlobScene make_blob(std::uint32_t seed, int size, double noise, double min_distance) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    Rgb fg{}, bg{};
    double dist = 0.0;
    do {
        for (int c = 0; c < 3; ++c) {
            fg[c] = unit(rng);
            bg[c] = unit(rng);
        }
        dist = std::sqrt((fg[0] - bg[0]) * (fg[0] - bg[0]) + (fg[1] - bg[1]) * (fg[1] - bg[1]) +
                         (fg[2] - bg[2]) * (fg[2] - bg[2]));
    } while (dist < min_distance);

    const double cx = uniform(0.32, 0.68) * size, cy = uniform(0.32, 0.68) * size;
    const double ra = uniform(0.14, 0.26) * size, rb = uniform(0.14, 0.26) * size;
    const double theta = uniform(0.0, std::numbers::pi);
    const double ct = std::cos(theta), st = std::sin(theta);

    BlobScene scene;
    scene.image = RasterImage(size, size);
    scene.mask = BinaryMask(size, size);
    scene.color_distance = dist;
    std::normal_distribution<double> gauss(0.0, noise);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double dx = x - cx, dy = y - cy;
            const double u = (dx * ct + dy * st) / ra, v = (-dx * st + dy * ct) / rb;
            const bool inside = u * u + v * v <= 1.0;
            const Rgb& base = inside ? fg : bg;
            Rgb px{};
            for (int c = 0; c < 3; ++c)
                px[c] = std::round(std::clamp(base[c] + gauss(rng), 0.0, 1.0) * 255.0) / 255.0;
            scene.image.set(x, y, px);
            scene.mask.data[scene.mask.width * y + x] = inside ? 1 : 0;
        }
    }
    return scene;
}

RasterImage make_bands(int width, int height, const Rgb& left, const Rgb& right) {
    RasterImage img(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) img.set(x, y, x < width / 2 ? left : right);
    return img;
}

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 1000; ++attempt) {
        auto candidate = base / ("spseg_" + tag + "_" + std::to_string(::getpid()) + "_" +
                                 std::to_string(counter++));
        if (std::filesystem::create_directory(candidate)) {
            path_ = candidate;
            return;
        }
    }
    throw std::runtime_error("could not create a temporary directory");
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out << bytes;
}

}  // namespace spseg::testing
