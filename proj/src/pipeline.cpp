#include "spseg/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

#include "spseg/color.hpp"
#include "spseg/errors.hpp"

namespace spseg {
namespace {

constexpr double kTieEps = 1e-12;

/// Relabels by order of first appearance so equal partitions compare equal.
std::vector<int> canonical(const std::vector<int>& assignment) {
    std::vector<int> remap;
    std::vector<int> out(assignment.size());
    int next = 0;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        const int l = assignment[i];
        if (static_cast<std::size_t>(l) >= remap.size()) remap.resize(l + 1, -1);
        if (remap[l] < 0) remap[l] = next++;
        out[i] = remap[l];
    }
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void PipelineConfig::validate() const {
    slic.validate();
    if (!(svm.c > 0.0)) throw InvalidParams("SVM C must be > 0");
    if (!(svm.gamma > 0.0)) throw InvalidParams("SVM gamma must be > 0");
    if (!(mrf.alpha > 0.0 && mrf.alpha <= 1.0)) throw InvalidParams("MRF damping must lie in (0, 1]");
    if (!(mrf.tol > 0.0)) throw InvalidParams("MRF tolerance must be > 0");
    if (mrf.max_sweeps < 1) throw InvalidParams("MRF sweep cap must be >= 1");
    if (max_outer_iters < 1) throw InvalidParams("max_outer_iters must be >= 1");
    if (!(texture.t1 >= 0.0 && texture.t2 >= texture.t1)) throw InvalidParams("texture thresholds must satisfy 0 <= t1 <= t2");
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::FixedPoint: return "fixed_point";
        case Termination::SingleClass: return "single_class";
        case Termination::Cycle: return "cycle";
        case Termination::IterationCap: return "iteration_cap";
    }
    return "unknown";
}

LabelState initialize(int superpixel_count) {
    LabelState s;
    s.assignment.resize(static_cast<std::size_t>(superpixel_count));
    for (int i = 0; i < superpixel_count; ++i) s.assignment[i] = i;
    s.num_labels = superpixel_count;
    return s;
}

StepResult step(const LabelState& state, const Matrix& features, const AdjacencyGraph& graph,
                const PipelineConfig& config, const TraceFn& trace) {
    StepResult result;
    result.info.labels_before = state.num_labels;

    ClassifierBank bank;
    try {
        bank = train_bank(features, state.assignment, config.svm);
    } catch (const SingleClass&) {
        result.state = state;
        result.single_class = true;
        result.info.labels_after = state.num_labels;
        return result;
    }

    const Matrix likelihood = classify_all(bank, features);
    SweepObserver observer;
    if (trace) {
        const int outer = state.iteration + 1;
        observer = [&trace, outer](int sweep, const BeliefState& st, double residual) {
            trace(outer, sweep, st, residual);
        };
    }
    const RegularizeResult reg = regularize(likelihood, graph, config.mrf, observer);
    const Matrix& post = reg.state.posterior;
    const std::size_t m = state.assignment.size();
    const std::size_t k = likelihood.cols();

    // Column j of the bank belongs to label j since active labels are 0..K-1.
    std::vector<int> next(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!bank.entries[state.assignment[i]].trained) {
            next[i] = state.assignment[i];
            continue;
        }
        std::size_t best = 0;
        for (std::size_t j = 1; j < k; ++j)
            if (post(i, j) > post(i, best) + kTieEps) best = j;
        next[i] = static_cast<int>(best);
    }

    result.info.energy = energy(reg.state, graph, next);
    {
        BeliefState flat;
        flat.likelihood = likelihood;
        flat.posterior = likelihood;
        flat.prior = Matrix(m, k, 1.0 / static_cast<double>(k));
        result.info.unregularized_energy = energy(flat, graph, next);
    }
    result.info.mrf_sweeps = reg.sweeps;
    result.info.mrf_converged = reg.converged;

    std::vector<int> members(k, 0);
    for (int l : next) ++members[l];
    std::vector<int> renumber(k, -1);
    int kept = 0;
    for (std::size_t j = 0; j < k; ++j)
        if (members[j] > 0) renumber[j] = kept++;

    result.state.assignment.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (next[i] != state.assignment[i]) ++result.info.reassigned;
        result.state.assignment[i] = renumber[next[i]];
    }
    result.state.num_labels = kept;
    result.state.iteration = state.iteration + 1;
    result.info.labels_after = kept;
    return result;
}

Prepared prepare(const RasterImage& image, const PipelineConfig& config) {
    config.validate();
    Prepared p;
    p.lab = rgb_to_lab(image);
    SlicParams slic_params = config.slic;
    slic_params.superpixels = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(slic_params.superpixels), image.pixel_count()));
    p.partition = slic(p.lab, slic_params);
    superpixel_stats(p.partition, image, p.lab);
    p.codes = texture_codes(p.lab, config.texture);
    p.features = describe_all(p.partition, image, p.codes);
    p.graph = build_adjacency(p.partition);
    edge_weights(p.graph, p.partition);
    return p;
}

SegmentResult run_prepared(Prepared prepared, const PipelineConfig& config, const TraceFn& trace) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    SegmentResult out;
    Diagnostics& diag = out.diagnostics;
    diag.width = prepared.partition.width;
    diag.height = prepared.partition.height;
    diag.superpixels = prepared.partition.size();

    LabelState state = initialize(prepared.partition.size());
    struct Seen {
        std::vector<int> partition;
        std::vector<int> assignment;
        int num_labels;
        double energy;
    };
    std::vector<Seen> history{{canonical(state.assignment), state.assignment, state.num_labels,
                               -std::numeric_limits<double>::infinity()}};

    diag.termination = Termination::IterationCap;
    if (state.num_labels <= 1) {
        diag.termination = Termination::SingleClass;
    } else {
        for (int iter = 0; iter < config.max_outer_iters; ++iter) {
            const auto t0 = std::chrono::steady_clock::now();
            StepResult res = step(state, prepared.features, prepared.graph, config, trace);
            if (res.single_class) {
                diag.termination = Termination::SingleClass;
                break;
            }
            diag.iterations.push_back({res.info, seconds_since(t0)});

            if (res.state.assignment == state.assignment) {
                state = std::move(res.state);
                diag.termination = Termination::FixedPoint;
                break;
            }
            auto part = canonical(res.state.assignment);
            const auto seen = std::find_if(history.begin(), history.end(),
                                           [&](const Seen& s) { return s.partition == part; });
            if (seen != history.end()) {
                const auto best = std::max_element(seen, history.end(),
                                                   [](const Seen& a, const Seen& b) { return a.energy < b.energy; });
                state.assignment = best->assignment;
                state.num_labels = best->num_labels;
                state.iteration = res.state.iteration;
                diag.termination = Termination::Cycle;
                break;
            }
            history.push_back({std::move(part), res.state.assignment, res.state.num_labels, res.info.energy});
            state = std::move(res.state);
            if (state.num_labels == 1) {
                diag.termination = Termination::SingleClass;
                break;
            }
        }
    }

    diag.final_labels = state.num_labels;
    out.superpixel_labels = state.assignment;
    out.labels = project_labels(prepared.partition, state.assignment);
    out.prepared = std::move(prepared);
    diag.total_seconds = seconds_since(start);
    return out;
}

SegmentResult run(const RasterImage& image, const PipelineConfig& config, const TraceFn& trace) {
    const auto start = std::chrono::steady_clock::now();
    SegmentResult out = run_prepared(prepare(image, config), config, trace);
    out.diagnostics.total_seconds = seconds_since(start);
    return out;
}

LabelMap project_labels(const SuperpixelPartition& p, std::span<const int> superpixel_labels) {
    if (superpixel_labels.size() != static_cast<std::size_t>(p.size()))
        throw LengthMismatch("one label per superpixel required");
    LabelMap lm(p.width, p.height);
    int max_label = -1;
    for (std::size_t i = 0; i < p.labels.size(); ++i) {
        lm.data[i] = superpixel_labels[p.labels[i]];
        max_label = std::max(max_label, lm.data[i]);
    }
    lm.num_labels = max_label + 1;
    return lm;
}

RasterImage render_overlay(const RasterImage& image, const LabelMap& labels) {
    if (image.width != labels.width || image.height != labels.height)
        throw DimensionMismatch("overlay image and label map differ in size");
    std::vector<Rgb> sums(static_cast<std::size_t>(labels.num_labels), Rgb{});
    std::vector<std::size_t> counts(static_cast<std::size_t>(labels.num_labels), 0);
    for (std::size_t i = 0; i < labels.pixel_count(); ++i) {
        const auto v = image.at(i);
        for (int c = 0; c < 3; ++c) sums[labels.data[i]][c] += v[c];
        ++counts[labels.data[i]];
    }
    RasterImage out(image.width, image.height);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const std::size_t i = image.index(x, y);
            const int l = labels.data[i];
            const bool edge = (x + 1 < image.width && labels.data[i + 1] != l) ||
                              (y + 1 < image.height && labels.data[i + image.width] != l);
            if (edge) {
                out.set(i, {1.0, 1.0, 1.0});
            } else {
                const double n = static_cast<double>(counts[l]);
                out.set(i, {sums[l][0] / n, sums[l][1] / n, sums[l][2] / n});
            }
        }
    }
    return out;
}

}  // namespace spseg
