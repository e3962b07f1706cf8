#include "spseg/mrf.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "spseg/errors.hpp"

namespace spseg {
namespace {

constexpr double kKlFloor = 1e-10;

void normalize(std::span<double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    for (double& x : v) x /= s;
}

// sum_j lambda_ij * rows(j)
void neighborhood_mix(const Matrix& rows, const AdjacencyGraph& g, int i, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const auto& nbrs = g.neighbors[i];
    const auto& w = g.weights[i];
    for (std::size_t n = 0; n < nbrs.size(); ++n) {
        const auto r = rows.row(nbrs[n]);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += w[n] * r[k];
    }
}

}  // namespace

std::size_t AdjacencyGraph::edge_count() const {
    std::size_t e = 0;
    for (const auto& n : neighbors) e += n.size();
    return e;
}

AdjacencyGraph build_adjacency(const SuperpixelPartition& p) {
    std::vector<std::set<int>> sets(static_cast<std::size_t>(p.size()));
    const int w = p.width, h = p.height;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int a = p.labels[static_cast<std::size_t>(y) * w + x];
            if (x + 1 < w) {
                const int b = p.labels[static_cast<std::size_t>(y) * w + x + 1];
                if (a != b) {
                    sets[a].insert(b);
                    sets[b].insert(a);
                }
            }
            if (y + 1 < h) {
                const int b = p.labels[static_cast<std::size_t>(y + 1) * w + x];
                if (a != b) {
                    sets[a].insert(b);
                    sets[b].insert(a);
                }
            }
        }
    }
    AdjacencyGraph g;
    g.neighbors.resize(sets.size());
    g.weights.resize(sets.size());
    for (std::size_t i = 0; i < sets.size(); ++i) g.neighbors[i].assign(sets[i].begin(), sets[i].end());
    return g;
}

void edge_weights(AdjacencyGraph& g, std::span<const Rgb> colors) {
    if (colors.size() != g.neighbors.size()) throw LengthMismatch("one color per graph node required");
    for (std::size_t i = 0; i < g.neighbors.size(); ++i) {
        const auto& nbrs = g.neighbors[i];
        auto& w = g.weights[i];
        w.assign(nbrs.size(), 0.0);
        double z = 0.0;
        for (std::size_t n = 0; n < nbrs.size(); ++n) {
            double d2 = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double d = colors[i][c] - colors[nbrs[n]][c];
                d2 += d * d;
            }
            w[n] = std::exp(-d2);
            z += w[n];
        }
        for (double& v : w) v /= z;
    }
}

void edge_weights(AdjacencyGraph& g, const SuperpixelPartition& p) {
    std::vector<Rgb> colors;
    colors.reserve(p.superpixels.size());
    for (const auto& sp : p.superpixels) colors.push_back(sp.mean_rgb);
    edge_weights(g, colors);
}

double kl(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw LengthMismatch("KL arguments differ in length");
    double qsum = 0.0;
    for (double v : q) qsum += std::max(v, kKlFloor);
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        const double qi = std::max(q[i], kKlFloor) / qsum;
        d += p[i] * std::log(p[i] / qi);
    }
    return d;
}

double energy(const BeliefState& state, const AdjacencyGraph& g, std::span<const int> hard_labels) {
    const std::size_t m = state.likelihood.rows();
    const std::size_t k = state.likelihood.cols();
    if (hard_labels.size() != m || static_cast<std::size_t>(g.size()) != m)
        throw LengthMismatch("energy inputs disagree in node count");
    std::vector<double> prior_mix(k), post_mix(k);
    double e = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        e += std::log(state.likelihood(i, hard_labels[i]));
        if (g.neighbors[i].empty()) continue;
        neighborhood_mix(state.prior, g, static_cast<int>(i), prior_mix);
        neighborhood_mix(state.posterior, g, static_cast<int>(i), post_mix);
        e -= 0.5 * (kl(state.prior.row(i), prior_mix) + kl(state.posterior.row(i), post_mix));
    }
    return e;
}

RegularizeResult regularize(const Matrix& likelihood, const AdjacencyGraph& g, const MrfParams& params,
                            const SweepObserver& observer) {
    const std::size_t m = likelihood.rows();
    const std::size_t k = likelihood.cols();
    if (static_cast<std::size_t>(g.size()) != m) throw LengthMismatch("graph and likelihood disagree in node count");

    RegularizeResult result;
    BeliefState& st = result.state;
    st.likelihood = likelihood;
    st.prior = Matrix(m, k, 1.0 / static_cast<double>(k));
    st.posterior = likelihood;
    for (std::size_t i = 0; i < m; ++i) normalize(st.posterior.row(i));

    Matrix next_prior(m, k), next_post(m, k);
    std::vector<double> prior_mix(k), post_mix(k);
    for (int sweep = 1; sweep <= params.max_sweeps; ++sweep) {
        for (std::size_t i = 0; i < m; ++i) {
            auto p = next_post.row(i);
            const auto l = likelihood.row(i);
            if (g.neighbors[i].empty()) {
                std::copy(l.begin(), l.end(), p.begin());
            } else {
                const auto pi = st.prior.row(i);
                for (std::size_t j = 0; j < k; ++j) p[j] = l[j] * pi[j];
            }
            normalize(p);
        }
        for (std::size_t i = 0; i < m; ++i) {
            auto out = next_prior.row(i);
            const auto old = st.prior.row(i);
            if (g.neighbors[i].empty()) {
                std::copy(old.begin(), old.end(), out.begin());
                continue;
            }
            neighborhood_mix(st.prior, g, static_cast<int>(i), prior_mix);
            neighborhood_mix(next_post, g, static_cast<int>(i), post_mix);
            for (std::size_t j = 0; j < k; ++j) out[j] = 0.5 * prior_mix[j] + 0.5 * post_mix[j];
            normalize(out);
            for (std::size_t j = 0; j < k; ++j) out[j] = (1.0 - params.alpha) * old[j] + params.alpha * out[j];
        }

        double residual = 0.0;
        for (std::size_t t = 0; t < m * k; ++t) {
            residual = std::max(residual, std::abs(next_post.data()[t] - st.posterior.data()[t]));
            residual = std::max(residual, std::abs(next_prior.data()[t] - st.prior.data()[t]));
        }
        std::swap(st.posterior, next_post);
        std::swap(st.prior, next_prior);
        result.sweeps = sweep;
        result.residual = residual;
        if (observer) observer(sweep, st, residual);
        if (residual < params.tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

}  // namespace spseg
