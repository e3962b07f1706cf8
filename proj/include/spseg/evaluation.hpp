#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spseg/image.hpp"

namespace spseg {

/// One pixel set per label of a LabelMap (raster indices, ascending).
using SegmentSet = std::vector<std::vector<int>>;

SegmentSet segments_from_labels(const LabelMap& lm);

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};

/// Throws EmptyMask / EmptySegment.
PrecisionRecall precision_recall(std::span<const int> segment, const BinaryMask& mask);

/// 2PR / (P + R), 0 when P + R = 0.
double f_measure(double precision, double recall);

double f_single(const SegmentSet& segments, const BinaryMask& mask);

struct MultiResult {
    double f = 0.0;
    std::vector<int> subset;  // segment indices, ascending
    bool exact = true;        // false when the greedy fallback ran
};

/// Best F over non-empty unions of segments. Exhaustive up to exact_limit
/// segments (ties go to the smaller subset, then the smaller bitmask),
/// greedy forward selection above it.
MultiResult f_multi(const SegmentSet& segments, const BinaryMask& mask, int exact_limit = 20);

/// Greedy forward selection regardless of size.
MultiResult f_multi_greedy(const SegmentSet& segments, const BinaryMask& mask);

int f_frag(std::span<const int> best_subset);

struct AnnotatorScore {
    double f_single = 0.0;
    double f_multi = 0.0;
    int f_frag = 0;
    std::vector<int> best_subset;
    bool exact = true;
};

struct EvalReport {
    std::vector<AnnotatorScore> annotators;
    double mean_f_single = 0.0;
    double mean_f_multi = 0.0;
    double mean_f_frag = 0.0;
};

/// Throws DimensionMismatch when any mask differs in size from the label map.
EvalReport evaluate(const LabelMap& lm, std::span<const BinaryMask> masks, int exact_limit = 20);

/// Mean and 1.96 * sd / sqrt(n) (sample sd; 0 for n < 2).
std::pair<double, double> mean_ci95(std::span<const double> values);

}  // namespace spseg
