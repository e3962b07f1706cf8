#pragma once

// Independent reference computations used by unit and acceptance tests.
// None of these call into the library's numerical code.

#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace spseg::oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense rbf_gram(const Dense& x, double gamma) {
    const std::size_t m = x.size();
    Dense k(m, std::vector<double>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double d = 0.0;
            for (std::size_t t = 0; t < x[i].size(); ++t) d += (x[i][t] - x[j][t]) * (x[i][t] - x[j][t]);
            k[i][j] = std::exp(-gamma * d);
        }
    return k;
}

inline double svm_dual(const Dense& k, const std::vector<int>& y, const std::vector<double>& a) {
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        lin += a[i];
        for (std::size_t j = 0; j < a.size(); ++j) quad += a[i] * a[j] * y[i] * y[j] * k[i][j];
    }
    return lin - 0.5 * quad;
}

/// Gaussian elimination with partial pivoting; false when singular.
inline bool solve_linear(Dense a, std::vector<double> b, std::vector<double>& x) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (std::abs(a[piv][c]) < 1e-12) return false;
        std::swap(a[piv], a[c]);
        std::swap(b[piv], b[c]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t cc = c; cc < n; ++cc) a[r][cc] -= f * a[c][cc];
            b[r] -= f * b[c];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t c = n; c-- > 0;) {
        double s = b[c];
        for (std::size_t cc = c + 1; cc < n; ++cc) s -= a[c][cc] * x[cc];
        x[c] = s / a[c][c];
    }
    return true;
}

/// Exact maximum of the soft-margin SVM dual by enumerating faces of the box:
/// each alpha_i is pinned at 0, pinned at C, or free. On each face the
/// equality-constrained stationary point is found from its KKT system and
/// kept when it lies inside the box. Exponential in M; meant for M <= 8.
inline std::pair<double, std::vector<double>> svm_dual_optimum(const Dense& k, const std::vector<int>& y, double c) {
    const std::size_t m = y.size();
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> best_alpha(m, 0.0);
    std::size_t faces = 1;
    for (std::size_t i = 0; i < m; ++i) faces *= 3;
    for (std::size_t code = 0; code < faces; ++code) {
        std::vector<int> state(m);
        std::size_t rest = code;
        for (std::size_t i = 0; i < m; ++i) {
            state[i] = static_cast<int>(rest % 3);  // 0: at 0, 1: free, 2: at C
            rest /= 3;
        }
        std::vector<std::size_t> free;
        std::vector<double> alpha(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            if (state[i] == 1) free.push_back(i);
            if (state[i] == 2) alpha[i] = c;
        }
        double fixed_sum = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            if (state[i] != 1) fixed_sum += alpha[i] * y[i];

        if (free.empty()) {
            if (std::abs(fixed_sum) > 1e-12) continue;
        } else {
            // Unknowns: alpha_F and the multiplier nu of sum alpha_i y_i = 0.
            const std::size_t f = free.size();
            Dense a(f + 1, std::vector<double>(f + 1, 0.0));
            std::vector<double> b(f + 1, 0.0);
            for (std::size_t r = 0; r < f; ++r) {
                const std::size_t i = free[r];
                b[r] = 1.0;
                for (std::size_t j = 0; j < m; ++j) {
                    const double q = y[i] * y[j] * k[i][j];
                    if (state[j] == 1) continue;
                    b[r] -= q * alpha[j];
                }
                for (std::size_t cc = 0; cc < f; ++cc) a[r][cc] = y[i] * y[free[cc]] * k[i][free[cc]];
                a[r][f] = y[i];
                a[f][r] = y[i];
            }
            b[f] = -fixed_sum;
            std::vector<double> sol;
            if (!solve_linear(a, b, sol)) continue;
            bool inside = true;
            for (std::size_t r = 0; r < f; ++r) {
                if (sol[r] < -1e-12 || sol[r] > c + 1e-12) inside = false;
                alpha[free[r]] = std::min(c, std::max(0.0, sol[r]));
            }
            if (!inside) continue;
        }
        const double v = svm_dual(k, y, alpha);
        if (v > best) {
            best = v;
            best_alpha = alpha;
        }
    }
    return {best, best_alpha};
}

/// Maximum of the dual over the grid alpha_i in {0, step, ..., C} restricted
/// to sum alpha_i y_i = 0, for M = 3 or M = 4. The last coordinate follows
/// from the equality constraint. For M = 4 the third coordinate is searched
/// exactly along its line: the objective is a concave quadratic in it, so the
/// best grid point is one of the two grid neighbors of the line optimum.
inline double svm_dual_grid(const Dense& k, const std::vector<int>& y, double c, double step) {
    const std::size_t m = y.size();
    const long steps = std::lround(c / step);
    double best = -std::numeric_limits<double>::infinity();
    auto value_at = [&](const std::vector<long>& idx) {
        std::vector<double> a(m);
        for (std::size_t i = 0; i < m; ++i) a[i] = idx[i] * step;
        return svm_dual(k, y, a);
    };
    auto last_index = [&](const std::vector<long>& idx) {
        long s = 0;
        for (std::size_t i = 0; i + 1 < m; ++i) s += y[i] * idx[i];
        return -y[m - 1] * s;
    };
    if (m == 3) {
        for (long i0 = 0; i0 <= steps; ++i0)
            for (long i1 = 0; i1 <= steps; ++i1) {
                std::vector<long> idx{i0, i1, 0};
                idx[2] = last_index(idx);
                if (idx[2] < 0 || idx[2] > steps) continue;
                best = std::max(best, value_at(idx));
            }
        return best;
    }
    if (m != 4) return std::numeric_limits<double>::quiet_NaN();
    for (long i0 = 0; i0 <= steps; ++i0)
        for (long i1 = 0; i1 <= steps; ++i1) {
            // idx3 = base + slope * t for t = idx2.
            const long base = -y[3] * (y[0] * i0 + y[1] * i1);
            const long slope = -y[3] * y[2];
            long lo = 0, hi = steps;
            if (slope > 0) {
                lo = std::max(lo, -base);
                hi = std::min(hi, steps - base);
            } else {
                lo = std::max(lo, base - steps);
                hi = std::min(hi, base);
            }
            if (lo > hi) continue;
            auto f = [&](long t) { return value_at({i0, i1, t, base + slope * t}); };
            const double f0 = f(0), f1 = f(1), fm = f(-1);
            const double curv = (f1 + fm - 2 * f0) / 2.0;  // per grid step squared
            const double lin = (f1 - fm) / 2.0;
            double t_star = curv < 0 ? -lin / (2 * curv) : (lin > 0 ? hi : lo);
            t_star = std::min<double>(hi, std::max<double>(lo, t_star));
            const long t0 = static_cast<long>(std::floor(t_star));
            for (long t : {t0 - 1, t0, t0 + 1, t0 + 2})
                if (t >= lo && t <= hi) best = std::max(best, f(t));
        }
    return best;
}

/// Platt cross-entropy with prior-corrected targets.
inline double platt_loss(std::span<const double> s, std::span<const int> y, double a, double b) {
    double np = 0, nn = 0;
    for (int v : y) (v > 0 ? np : nn) += 1;
    const double tp = (np + 1) / (np + 2), tn = 1 / (nn + 2);
    double loss = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double t = y[i] > 0 ? tp : tn;
        const double z = a * s[i] + b;
        // log p = -log(1 + e^z), log(1 - p) = z - log(1 + e^z)
        const double log1pez = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        loss += t * log1pez + (1 - t) * (log1pez - z);
    }
    return loss;
}

/// Coarse grid over (A, B) followed by a shrinking compass search.
inline std::pair<double, double> platt_minimize(std::span<const double> s, std::span<const int> y) {
    double ba = 0, bb = 0, best = platt_loss(s, y, 0, 0);
    for (double a = -30; a <= 30; a += 0.05)
        for (double b = -15; b <= 15; b += 0.05) {
            const double v = platt_loss(s, y, a, b);
            if (v < best) {
                best = v;
                ba = a;
                bb = b;
            }
        }
    for (double h = 0.05; h > 1e-13; h *= 0.5) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (auto [da, db] : {std::pair{h, 0.0}, std::pair{-h, 0.0}, std::pair{0.0, h}, std::pair{0.0, -h},
                                  std::pair{h, h}, std::pair{-h, -h}, std::pair{h, -h}, std::pair{-h, h}}) {
                const double v = platt_loss(s, y, ba + da, bb + db);
                if (v < best) {
                    best = v;
                    ba += da;
                    bb += db;
                    improved = true;
                }
            }
        }
    }
    return {ba, bb};
}

/// KL(p || q) with q floored at 1e-10 and renormalized.
inline double kl(const std::vector<double>& p, const std::vector<double>& q) {
    std::vector<double> qq(q);
    double z = 0.0;
    for (auto& v : qq) {
        v = std::max(v, 1e-10);
        z += v;
    }
    double out = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0) out += p[i] * std::log(p[i] / (qq[i] / z));
    return out;
}

/// Energy written directly from its definition, with dense per-node loops.
inline double mrf_energy(const Dense& prior, const Dense& post, const Dense& like,
                         const std::vector<std::vector<int>>& nbrs, const Dense& lambda,
                         const std::vector<int>& labels) {
    double e = 0.0;
    const std::size_t k = like.empty() ? 0 : like[0].size();
    for (std::size_t i = 0; i < like.size(); ++i) {
        e += std::log(like[i][labels[i]]);
        if (nbrs[i].empty()) continue;
        std::vector<double> pin(k, 0.0), pn(k, 0.0);
        for (std::size_t t = 0; t < nbrs[i].size(); ++t)
            for (std::size_t l = 0; l < k; ++l) {
                pin[l] += lambda[i][t] * prior[nbrs[i][t]][l];
                pn[l] += lambda[i][t] * post[nbrs[i][t]][l];
            }
        e -= 0.5 * (kl(prior[i], pin) + kl(post[i], pn));
    }
    return e;
}

/// Best F over all non-empty unions, by enumerating bitmasks. Each segment is
/// summarized by (size, foreground hits). Scores are compared as exact
/// fractions hit / (size + fg). Ties: fewer segments, then the numerically
/// smaller mask.
struct PowerSetBest {
    double f = 0.0;
    unsigned mask = 0;
};

inline PowerSetBest f_multi_power_set(const std::vector<std::pair<long, long>>& seg, long fg) {
    PowerSetBest out;
    long best_size = 0, best_hit = -1;
    int best_bits = 0;
    for (unsigned m = 1; m < (1u << seg.size()); ++m) {
        long size = 0, hit = 0;
        for (std::size_t s = 0; s < seg.size(); ++s)
            if (m & (1u << s)) {
                size += seg[s].first;
                hit += seg[s].second;
            }
        const int bits = __builtin_popcount(m);
        const long long lhs = static_cast<long long>(hit) * (best_size + fg);
        const long long rhs = static_cast<long long>(best_hit) * (size + fg);
        if (best_hit < 0 || lhs > rhs || (lhs == rhs && bits < best_bits)) {
            best_size = size;
            best_hit = hit;
            best_bits = bits;
            out.mask = m;
        }
    }
    const double p = static_cast<double>(best_hit) / best_size, r = static_cast<double>(best_hit) / fg;
    out.f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    return out;
}

}  // namespace spseg::oracle
