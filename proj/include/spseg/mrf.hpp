#pragma once

#include <functional>
#include <span>
#include <vector>

#include "spseg/image.hpp"
#include "spseg/presegment.hpp"

namespace spseg {

/// Superpixel adjacency (shared 4-connected pixel boundary) with per-node
/// color-similarity weights. Neighbor lists are sorted ascending.
struct AdjacencyGraph {
    std::vector<std::vector<int>> neighbors;
    std::vector<std::vector<double>> weights;  // aligned with neighbors

    int size() const { return static_cast<int>(neighbors.size()); }
    std::size_t edge_count() const;  // directed
};

AdjacencyGraph build_adjacency(const SuperpixelPartition& p);

/// lambda_ij = exp(-|C_i - C_j|^2) / Z_i, normalized over each node's
/// neighbors. `colors` holds C_i per node.
void edge_weights(AdjacencyGraph& g, std::span<const Rgb> colors);
void edge_weights(AdjacencyGraph& g, const SuperpixelPartition& p);

/// KL(p || q) in nats. q is floored at 1e-10 and renormalized; terms with
/// p(x) = 0 contribute nothing. Throws LengthMismatch.
double kl(std::span<const double> p, std::span<const double> q);

/// Priors, posteriors and likelihoods, each M x K.
struct BeliefState {
    Matrix prior;
    Matrix posterior;
    Matrix likelihood;
};

/// sum_i log L(i, l_i) - 1/2 (KL(pi_i, pi_N_i) + KL(p_i, p_N_i)), where the
/// neighborhood terms are lambda-weighted sums. Isolated nodes contribute
/// the log-likelihood only.
double energy(const BeliefState& state, const AdjacencyGraph& g, std::span<const int> hard_labels);

struct MrfParams {
    double alpha = 0.5;   // damping
    double tol = 1e-6;
    int max_sweeps = 100;
};

struct RegularizeResult {
    BeliefState state;
    int sweeps = 0;
    double residual = 0.0;
    bool converged = false;  // false means the sweep cap ended the loop
};

/// Called after every sweep with (sweep index from 1, state, residual).
using SweepObserver = std::function<void(int, const BeliefState&, double)>;

/// Synchronous damped fixed point. Starting from uniform priors, each sweep
/// sets p_i ~ L_i * pi_i and moves pi_i halfway (alpha) towards
/// normalize(1/2 pi_N_i + 1/2 p_N_i). Nodes without neighbors keep a uniform
/// prior and p_i = L_i normalized.
RegularizeResult regularize(const Matrix& likelihood, const AdjacencyGraph& g,
                            const MrfParams& params = {}, const SweepObserver& observer = {});

}  // namespace spseg
