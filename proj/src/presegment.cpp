#include "spseg/presegment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "spseg/errors.hpp"

namespace spseg {
namespace {

struct Center {
    double l, a, b, x, y;
};

double lab_gradient(const LabImage& lab, int x, int y) {
    auto clampx = [&](int v) { return std::clamp(v, 0, lab.width - 1); };
    auto clampy = [&](int v) { return std::clamp(v, 0, lab.height - 1); };
    const auto r = lab.at(clampx(x + 1), y);
    const auto l = lab.at(clampx(x - 1), y);
    const auto d = lab.at(x, clampy(y + 1));
    const auto u = lab.at(x, clampy(y - 1));
    double g = 0.0;
    for (int c = 0; c < 3; ++c) g += (r[c] - l[c]) * (r[c] - l[c]) + (d[c] - u[c]) * (d[c] - u[c]);
    return g;
}

void fill_pixel_lists(SuperpixelPartition& p) {
    for (auto& sp : p.superpixels) sp.pixels.clear();
    for (std::size_t i = 0; i < p.labels.size(); ++i) p.superpixels[p.labels[i]].pixels.push_back(static_cast<int>(i));
}

void fill_geometry_and_lab(SuperpixelPartition& p, const LabImage& lab) {
    for (auto& sp : p.superpixels) {
        double sx = 0, sy = 0;
        Lab acc{};
        for (int idx : sp.pixels) {
            sx += idx % p.width;
            sy += idx / p.width;
            const auto v = lab.at(static_cast<std::size_t>(idx));
            for (int c = 0; c < 3; ++c) acc[c] += v[c];
        }
        const double n = static_cast<double>(sp.pixels.size());
        sp.cx = sx / n;
        sp.cy = sy / n;
        for (int c = 0; c < 3; ++c) sp.mean_lab[c] = acc[c] / n;
    }
}

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        for (std::size_t i = 0; i < n; ++i) parent_[i] = static_cast<int>(i);
    }
    int find(int v) {
        while (parent_[v] != v) {
            parent_[v] = parent_[parent_[v]];
            v = parent_[v];
        }
        return v;
    }
    void attach(int child, int root) { parent_[child] = root; }

private:
    std::vector<int> parent_;
};

}  // namespace

void SlicParams::validate() const {
    if (superpixels < 1) throw InvalidParams("superpixel count must be >= 1");
    if (!(compactness > 0.0)) throw InvalidParams("compactness must be > 0");
    if (max_iters < 1) throw InvalidParams("SLIC max_iters must be >= 1");
    if (!(min_region_frac > 0.0 && min_region_frac < 1.0))
        throw InvalidParams("min_region_frac must lie in (0, 1)");
}

SuperpixelPartition partition_from_labels(int width, int height, std::vector<int> labels) {
    if (labels.size() != static_cast<std::size_t>(width) * height)
        throw DimensionMismatch("label vector does not match image size");
    std::vector<int> ids(labels);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (auto& id : labels) id = static_cast<int>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());

    SuperpixelPartition p;
    p.width = width;
    p.height = height;
    p.labels = std::move(labels);
    p.superpixels.resize(ids.size());
    fill_pixel_lists(p);
    return p;
}

SuperpixelPartition slic(const LabImage& lab, const SlicParams& params) {
    params.validate();
    const int w = lab.width;
    const int h = lab.height;
    const std::size_t n = lab.pixel_count();
    if (static_cast<std::size_t>(params.superpixels) > n)
        throw InvalidParams("superpixel count " + std::to_string(params.superpixels) + " exceeds pixel count");

    const double step = std::sqrt(static_cast<double>(n) / params.superpixels);
    const int ny = std::clamp(static_cast<int>(std::lround(h / step)), 1, h);
    const int nx = std::clamp(params.superpixels / ny, 1, w);

    std::vector<Center> centers;
    centers.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int gx = static_cast<int>((i + 0.5) * w / nx);
            const int gy = static_cast<int>((j + 0.5) * h / ny);
            int bx = gx, by = gy;
            double best = std::numeric_limits<double>::infinity();
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int x = gx + dx, y = gy + dy;
                    if (x < 0 || x >= w || y < 0 || y >= h) continue;
                    const double g = lab_gradient(lab, x, y);
                    if (g < best) {
                        best = g;
                        bx = x;
                        by = y;
                    }
                }
            }
            const auto v = lab.at(bx, by);
            centers.push_back({v[0], v[1], v[2], static_cast<double>(bx), static_cast<double>(by)});
        }
    }

    // Grid-cell assignment covers pixels no search window reaches.
    std::vector<int> labels(n);
    for (int y = 0; y < h; ++y) {
        const int j = std::min(ny - 1, y * ny / h);
        for (int x = 0; x < w; ++x) labels[lab.index(x, y)] = j * nx + std::min(nx - 1, x * nx / w);
    }

    const double spatial_weight = params.compactness / step;
    std::vector<double> dist(n);
    for (int iter = 0; iter < params.max_iters; ++iter) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        for (std::size_t k = 0; k < centers.size(); ++k) {
            const Center& c = centers[k];
            const int x0 = std::max(0, static_cast<int>(std::floor(c.x - step)));
            const int x1 = std::min(w - 1, static_cast<int>(std::ceil(c.x + step)));
            const int y0 = std::max(0, static_cast<int>(std::floor(c.y - step)));
            const int y1 = std::min(h - 1, static_cast<int>(std::ceil(c.y + step)));
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const std::size_t idx = lab.index(x, y);
                    const double dl = lab.data[3 * idx] - c.l;
                    const double da = lab.data[3 * idx + 1] - c.a;
                    const double db = lab.data[3 * idx + 2] - c.b;
                    const double dx = x - c.x, dy = y - c.y;
                    const double d = std::sqrt(dl * dl + da * da + db * db) + spatial_weight * std::sqrt(dx * dx + dy * dy);
                    if (d < dist[idx]) {
                        dist[idx] = d;
                        labels[idx] = static_cast<int>(k);
                    }
                }
            }
        }

        std::vector<Center> sums(centers.size(), Center{0, 0, 0, 0, 0});
        std::vector<std::size_t> counts(centers.size(), 0);
        for (std::size_t idx = 0; idx < n; ++idx) {
            Center& s = sums[labels[idx]];
            s.l += lab.data[3 * idx];
            s.a += lab.data[3 * idx + 1];
            s.b += lab.data[3 * idx + 2];
            s.x += static_cast<double>(idx % w);
            s.y += static_cast<double>(idx / w);
            ++counts[labels[idx]];
        }
        double residual = 0.0;
        for (std::size_t k = 0; k < centers.size(); ++k) {
            if (counts[k] == 0) continue;
            const double inv = 1.0 / static_cast<double>(counts[k]);
            const Center next{sums[k].l * inv, sums[k].a * inv, sums[k].b * inv, sums[k].x * inv, sums[k].y * inv};
            const Center& prev = centers[k];
            const double move = std::sqrt((next.l - prev.l) * (next.l - prev.l) + (next.a - prev.a) * (next.a - prev.a) +
                                          (next.b - prev.b) * (next.b - prev.b) + (next.x - prev.x) * (next.x - prev.x) +
                                          (next.y - prev.y) * (next.y - prev.y));
            residual = std::max(residual, move);
            centers[k] = next;
        }
        if (residual < 1e-3) break;
    }

    SuperpixelPartition raw = partition_from_labels(w, h, std::move(labels));
    SuperpixelPartition out = enforce_connectivity(raw, params);
    fill_geometry_and_lab(out, lab);
    return out;
}

SuperpixelPartition enforce_connectivity(const SuperpixelPartition& p, const SlicParams& params) {
    const int w = p.width;
    const int h = p.height;
    const std::size_t n = p.pixel_count();
    const double threshold = params.min_region_frac * static_cast<double>(n) / params.superpixels;

    // 4-connected fragments, numbered in raster order of their first pixel.
    std::vector<int> fragment(n, -1);
    std::vector<int> fragment_label;
    std::vector<std::size_t> fragment_size;
    std::vector<int> stack;
    for (std::size_t start = 0; start < n; ++start) {
        if (fragment[start] >= 0) continue;
        const int id = static_cast<int>(fragment_label.size());
        const int label = p.labels[start];
        fragment_label.push_back(label);
        fragment_size.push_back(0);
        fragment[start] = id;
        stack.assign(1, static_cast<int>(start));
        while (!stack.empty()) {
            const int idx = stack.back();
            stack.pop_back();
            ++fragment_size[id];
            const int x = idx % w, y = idx / w;
            const int nbrs[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
            for (const auto& q : nbrs) {
                if (q[0] < 0 || q[0] >= w || q[1] < 0 || q[1] >= h) continue;
                const int qi = q[1] * w + q[0];
                if (fragment[qi] < 0 && p.labels[qi] == label) {
                    fragment[qi] = id;
                    stack.push_back(qi);
                }
            }
        }
    }
    const std::size_t count = fragment_label.size();

    // The largest fragment of each original id survives the size test only.
    std::vector<bool> primary(count, false);
    {
        const int max_label = n ? *std::max_element(p.labels.begin(), p.labels.end()) : 0;
        std::vector<int> best(static_cast<std::size_t>(max_label) + 1, -1);
        for (std::size_t f = 0; f < count; ++f) {
            int& b = best[fragment_label[f]];
            if (b < 0 || fragment_size[f] > fragment_size[b]) b = static_cast<int>(f);
        }
        for (int b : best)
            if (b >= 0) primary[b] = true;
    }

    std::vector<std::set<int>> adjacent(count);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int a = fragment[y * w + x];
            if (x + 1 < w) {
                const int b = fragment[y * w + x + 1];
                if (a != b) {
                    adjacent[a].insert(b);
                    adjacent[b].insert(a);
                }
            }
            if (y + 1 < h) {
                const int b = fragment[(y + 1) * w + x];
                if (a != b) {
                    adjacent[a].insert(b);
                    adjacent[b].insert(a);
                }
            }
        }
    }

    UnionFind groups(count);
    std::vector<std::size_t> size(fragment_size);
    for (std::size_t f = 0; f < count; ++f) {
        const int root = static_cast<int>(f);
        if (groups.find(root) != root) continue;
        const bool small = static_cast<double>(size[f]) < threshold || !primary[f];
        if (!small) continue;

        int target = -1;
        std::set<int> live;
        for (int nb : adjacent[f]) {
            const int r = groups.find(nb);
            if (r == root) continue;
            live.insert(r);
        }
        for (int r : live) {
            if (target < 0 || size[r] > size[target]) target = r;  // ascending ids keep the smaller on ties
        }
        if (target < 0) continue;

        groups.attach(root, target);
        size[target] += size[f];
        if (adjacent[f].size() > adjacent[target].size()) std::swap(adjacent[f], adjacent[target]);
        adjacent[target].insert(adjacent[f].begin(), adjacent[f].end());
        adjacent[f].clear();
    }

    std::vector<int> out_labels(n);
    std::vector<int> remap(count, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int r = groups.find(fragment[i]);
        if (remap[r] < 0) remap[r] = next++;
        out_labels[i] = remap[r];
    }

    SuperpixelPartition out;
    out.width = w;
    out.height = h;
    out.labels = std::move(out_labels);
    out.superpixels.resize(static_cast<std::size_t>(next));
    fill_pixel_lists(out);
    return out;
}

void superpixel_stats(SuperpixelPartition& p, const RasterImage& img, const LabImage& lab) {
    if (img.width != p.width || img.height != p.height || lab.width != p.width || lab.height != p.height)
        throw DimensionMismatch("partition and image sizes differ");
    fill_pixel_lists(p);
    fill_geometry_and_lab(p, lab);
    for (auto& sp : p.superpixels) {
        Rgb acc{};
        for (int idx : sp.pixels) {
            const auto v = img.at(static_cast<std::size_t>(idx));
            for (int c = 0; c < 3; ++c) acc[c] += v[c];
        }
        const double cnt = static_cast<double>(sp.pixels.size());
        for (int c = 0; c < 3; ++c) sp.mean_rgb[c] = acc[c] / cnt;
    }
}

}  // namespace spseg
