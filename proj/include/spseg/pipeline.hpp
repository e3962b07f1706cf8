#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spseg/classifier.hpp"
#include "spseg/descriptor.hpp"
#include "spseg/image.hpp"
#include "spseg/mrf.hpp"
#include "spseg/presegment.hpp"

namespace spseg {

struct PipelineConfig {
    SlicParams slic;
    SvmParams svm;
    MrfParams mrf;
    TextureParams texture;
    int max_outer_iters = 50;

    void validate() const;
};

/// Current superpixel labeling. Active labels are always 0..K-1.
struct LabelState {
    std::vector<int> assignment;
    int num_labels = 0;
    int iteration = 0;
};

LabelState initialize(int superpixel_count);

struct StepInfo {
    int labels_before = 0;
    int labels_after = 0;
    int reassigned = 0;
    int mrf_sweeps = 0;
    bool mrf_converged = false;
    double energy = 0.0;              // Eq. energy of the new labeling
    double unregularized_energy = 0.0;  // same labeling with p = L, pi uniform
};

struct StepResult {
    LabelState state;
    StepInfo info;
    bool single_class = false;  // bank could not be trained: converged
};

/// Per-sweep MRF callback: (outer iteration from 1, sweep from 1, beliefs, residual).
using TraceFn = std::function<void(int, int, const BeliefState&, double)>;

/// One outer iteration: train bank, classify, regularize, MAP relabel with
/// ties to the smallest label id, drop empty labels and renumber.
StepResult step(const LabelState& state, const Matrix& features, const AdjacencyGraph& graph,
                const PipelineConfig& config, const TraceFn& trace = {});

enum class Termination { FixedPoint, SingleClass, Cycle, IterationCap };

std::string to_string(Termination t);

struct IterationRecord {
    StepInfo info;
    double seconds = 0.0;
};

struct Diagnostics {
    int width = 0;
    int height = 0;
    int superpixels = 0;
    int final_labels = 0;
    Termination termination = Termination::FixedPoint;
    std::vector<IterationRecord> iterations;
    double total_seconds = 0.0;
};

/// Intermediate products of the front half of the pipeline.
struct Prepared {
    LabImage lab;
    SuperpixelPartition partition;
    std::vector<std::uint8_t> codes;
    Matrix features;
    AdjacencyGraph graph;
};

Prepared prepare(const RasterImage& image, const PipelineConfig& config);

struct SegmentResult {
    LabelMap labels;
    std::vector<int> superpixel_labels;
    Diagnostics diagnostics;
    Prepared prepared;
};

/// Runs the outer loop on prepared data until the labeling repeats, a cycle
/// is detected (the highest-energy state of the cycle is kept), a single
/// class remains, or max_outer_iters is reached.
SegmentResult run_prepared(Prepared prepared, const PipelineConfig& config, const TraceFn& trace = {});

SegmentResult run(const RasterImage& image, const PipelineConfig& config, const TraceFn& trace = {});

/// Projects superpixel labels onto pixels.
LabelMap project_labels(const SuperpixelPartition& p, std::span<const int> superpixel_labels);

/// Mean-color fill per segment with white boundaries.
RasterImage render_overlay(const RasterImage& image, const LabelMap& labels);

}  // namespace spseg
