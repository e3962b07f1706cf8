#include "spseg/evaluation.hpp"

#include <bit>
#include <cmath>
#include <cstdint>

#include "spseg/errors.hpp"

namespace spseg {
namespace {

/// Segment sizes and foreground overlaps; F of any union follows from sums.
struct Overlap {
    std::vector<std::size_t> size;
    std::vector<std::size_t> hit;
    std::size_t foreground = 0;
};

Overlap overlaps(const SegmentSet& segments, const BinaryMask& mask) {
    Overlap o;
    o.foreground = mask.foreground_count();
    if (o.foreground == 0) throw EmptyMask("mask has no foreground pixels");
    o.size.reserve(segments.size());
    o.hit.reserve(segments.size());
    for (const auto& seg : segments) {
        std::size_t h = 0;
        for (int idx : seg) {
            if (idx < 0 || static_cast<std::size_t>(idx) >= mask.pixel_count())
                throw DimensionMismatch("segment pixel outside the mask");
            h += mask.data[idx];
        }
        o.size.push_back(seg.size());
        o.hit.push_back(h);
    }
    return o;
}

double union_f(std::size_t size, std::size_t hit, std::size_t foreground) {
    if (size == 0) return 0.0;
    return f_measure(static_cast<double>(hit) / static_cast<double>(size),
                     static_cast<double>(hit) / static_cast<double>(foreground));
}

/// F of a union equals 2 hit / (size + foreground). Candidates are compared
/// by cross-multiplying these fractions, so equal scores tie exactly.
int compare_f(std::size_t hit_a, std::size_t size_a, std::size_t hit_b, std::size_t size_b, std::size_t fg) {
    const unsigned __int128 lhs = static_cast<unsigned __int128>(hit_a) * (size_b + fg);
    const unsigned __int128 rhs = static_cast<unsigned __int128>(hit_b) * (size_a + fg);
    return lhs > rhs ? 1 : (lhs < rhs ? -1 : 0);
}

}  // namespace

SegmentSet segments_from_labels(const LabelMap& lm) {
    SegmentSet s(static_cast<std::size_t>(lm.num_labels));
    for (std::size_t i = 0; i < lm.data.size(); ++i) s[lm.data[i]].push_back(static_cast<int>(i));
    return s;
}

PrecisionRecall precision_recall(std::span<const int> segment, const BinaryMask& mask) {
    const std::size_t fg = mask.foreground_count();
    if (fg == 0) throw EmptyMask("mask has no foreground pixels");
    if (segment.empty()) throw EmptySegment("segment has no pixels");
    std::size_t hit = 0;
    for (int idx : segment) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= mask.pixel_count())
            throw DimensionMismatch("segment pixel outside the mask");
        hit += mask.data[idx];
    }
    return {static_cast<double>(hit) / static_cast<double>(segment.size()),
            static_cast<double>(hit) / static_cast<double>(fg)};
}

double f_measure(double precision, double recall) {
    const double s = precision + recall;
    return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

double f_single(const SegmentSet& segments, const BinaryMask& mask) {
    const Overlap o = overlaps(segments, mask);
    double best = 0.0;
    for (std::size_t i = 0; i < segments.size(); ++i) best = std::max(best, union_f(o.size[i], o.hit[i], o.foreground));
    return best;
}

MultiResult f_multi_greedy(const SegmentSet& segments, const BinaryMask& mask) {
    const Overlap o = overlaps(segments, mask);
    MultiResult r;
    r.exact = false;
    if (segments.empty()) return r;

    std::vector<bool> used(segments.size(), false);
    std::size_t size = 0, hit = 0;
    bool any = false;
    while (true) {
        int pick = -1;
        std::size_t pick_size = size, pick_hit = hit;
        for (std::size_t i = 0; i < segments.size(); ++i) {
            if (used[i]) continue;
            const std::size_t s = size + o.size[i], h = hit + o.hit[i];
            // The first pick is the best single segment even when its F is 0.
            if ((pick < 0 && !any) || compare_f(h, s, pick_hit, pick_size, o.foreground) > 0) {
                pick = static_cast<int>(i);
                pick_size = s;
                pick_hit = h;
            }
        }
        if (pick < 0) break;
        used[pick] = true;
        size = pick_size;
        hit = pick_hit;
        any = true;
    }
    r.f = any ? union_f(size, hit, o.foreground) : 0.0;
    for (std::size_t i = 0; i < segments.size(); ++i)
        if (used[i]) r.subset.push_back(static_cast<int>(i));
    return r;
}

MultiResult f_multi(const SegmentSet& segments, const BinaryMask& mask, int exact_limit) {
    if (segments.size() > static_cast<std::size_t>(exact_limit) || segments.size() >= 63)
        return f_multi_greedy(segments, mask);

    const Overlap o = overlaps(segments, mask);
    const std::size_t n = segments.size();
    MultiResult r;
    if (n == 0) return r;

    const std::uint64_t total = std::uint64_t{1} << n;
    std::uint64_t best_mask = 0;
    std::size_t best_size = 0, best_hit = 0;
    int best_count = 0;
    for (std::uint64_t s = 1; s < total; ++s) {
        std::size_t size = 0, hit = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (s & (std::uint64_t{1} << i)) {
                size += o.size[i];
                hit += o.hit[i];
            }
        }
        const int count = std::popcount(s);
        const int cmp = best_mask == 0 ? 1 : compare_f(hit, size, best_hit, best_size, o.foreground);
        if (cmp > 0 || (cmp == 0 && count < best_count)) {
            best_mask = s;
            best_size = size;
            best_hit = hit;
            best_count = count;
        }
    }
    const double best_f = union_f(best_size, best_hit, o.foreground);
    r.f = best_f;
    for (std::size_t i = 0; i < n; ++i)
        if (best_mask & (std::uint64_t{1} << i)) r.subset.push_back(static_cast<int>(i));
    return r;
}

int f_frag(std::span<const int> best_subset) {
    return best_subset.empty() ? 0 : static_cast<int>(best_subset.size()) - 1;
}

EvalReport evaluate(const LabelMap& lm, std::span<const BinaryMask> masks, int exact_limit) {
    if (masks.empty()) throw InvalidParams("at least one mask is required");
    for (const auto& m : masks)
        if (m.width != lm.width || m.height != lm.height)
            throw DimensionMismatch("mask and label map differ in size");

    const SegmentSet segments = segments_from_labels(lm);
    EvalReport report;
    for (const auto& mask : masks) {
        AnnotatorScore a;
        a.f_single = f_single(segments, mask);
        MultiResult multi = f_multi(segments, mask, exact_limit);
        a.f_multi = multi.f;
        a.best_subset = std::move(multi.subset);
        a.exact = multi.exact;
        a.f_frag = f_frag(a.best_subset);
        report.mean_f_single += a.f_single;
        report.mean_f_multi += a.f_multi;
        report.mean_f_frag += a.f_frag;
        report.annotators.push_back(std::move(a));
    }
    const double n = static_cast<double>(masks.size());
    report.mean_f_single /= n;
    report.mean_f_multi /= n;
    report.mean_f_frag /= n;
    return report;
}

std::pair<double, double> mean_ci95(std::span<const double> values) {
    if (values.empty()) return {0.0, 0.0};
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / n;
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    return {mean, 1.96 * sd / std::sqrt(n)};
}

}  // namespace spseg
