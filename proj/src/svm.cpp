#include <algorithm>
#include <cmath>
#include <limits>

#include "spseg/classifier.hpp"
#include "spseg/errors.hpp"

namespace spseg {
namespace {

constexpr double kBoundEps = 1e-12;

/// Sequential minimal optimization with Platt's heuristics, made
/// deterministic: the outer loop scans in index order and the second choice
/// maximizes |E1 - E2| over unbound multipliers (smallest index on ties).
class SmoSolver {
public:
    SmoSolver(const Matrix& kernel, std::span<const int> y, double c, double tol)
        : k_(kernel), y_(y), c_(c), tol_(tol), m_(y.size()), alpha_(m_, 0.0), f_(m_, 0.0) {}

    void solve(int max_passes) {
        bool examine_all = true;
        int changed = 0;
        while ((changed > 0 || examine_all) && passes_ < max_passes) {
            changed = 0;
            for (std::size_t i = 0; i < m_; ++i) {
                if (examine_all || is_free(i)) changed += examine(i);
            }
            ++passes_;
            if (examine_all) {
                examine_all = false;
            } else if (changed == 0) {
                examine_all = true;
            }
        }
        bias_ = final_bias();
    }

    const std::vector<double>& alpha() const { return alpha_; }
    double bias() const { return bias_; }
    int steps() const { return steps_; }
    int passes() const { return passes_; }

private:
    bool is_free(std::size_t i) const { return alpha_[i] > 0.0 && alpha_[i] < c_; }
    double error(std::size_t i) const { return f_[i] + bias_ - y_[i]; }

    int examine(std::size_t i2) {
        const double e2 = error(i2);
        const double r2 = e2 * y_[i2];
        if (!((r2 < -tol_ && alpha_[i2] < c_) || (r2 > tol_ && alpha_[i2] > 0.0))) return 0;

        std::size_t best = m_;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (!is_free(i)) continue;
            const double gap = std::abs(error(i) - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best < m_ && take_step(best, i2)) return 1;
        for (std::size_t i = 0; i < m_; ++i)
            if (is_free(i) && take_step(i, i2)) return 1;
        for (std::size_t i = 0; i < m_; ++i)
            if (take_step(i, i2)) return 1;
        return 0;
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) return false;
        const double a1 = alpha_[i1], a2 = alpha_[i2];
        const double y1 = y_[i1], y2 = y_[i2];
        const double e1 = error(i1), e2 = error(i2);
        const double s = y1 * y2;

        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(c_, c_ + a2 - a1);
        } else {
            lo = std::max(0.0, a1 + a2 - c_);
            hi = std::min(c_, a1 + a2);
        }
        if (hi - lo < kBoundEps) return false;

        const double k11 = k_(i1, i1), k12 = k_(i1, i2), k22 = k_(i2, i2);
        const double eta = k11 + k22 - 2.0 * k12;
        double a2n;
        if (eta > kBoundEps) {
            a2n = std::clamp(a2 + y2 * (e1 - e2) / eta, lo, hi);
        } else {
            // Flat curvature: the objective is linear along the constraint line.
            const double slope = y2 * (e1 - e2);
            if (slope > 0.0) {
                a2n = hi;
            } else if (slope < 0.0) {
                a2n = lo;
            } else {
                return false;
            }
        }
        if (a2n < kBoundEps) a2n = 0.0;
        if (a2n > c_ - kBoundEps) a2n = c_;
        if (std::abs(a2n - a2) < kBoundEps * (a2n + a2 + kBoundEps)) return false;

        double a1n = a1 + s * (a2 - a2n);
        if (a1n < kBoundEps) a1n = 0.0;
        if (a1n > c_ - kBoundEps) a1n = c_;

        const double d1 = y1 * (a1n - a1);
        const double d2 = y2 * (a2n - a2);
        for (std::size_t i = 0; i < m_; ++i) f_[i] += d1 * k_(i, i1) + d2 * k_(i, i2);
        alpha_[i1] = a1n;
        alpha_[i2] = a2n;

        const double b1 = y1 - f_[i1];
        const double b2 = y2 - f_[i2];
        if (is_free(i1)) {
            bias_ = b1;
        } else if (is_free(i2)) {
            bias_ = b2;
        } else {
            bias_ = 0.5 * (b1 + b2);
        }
        ++steps_;
        return true;
    }

    // Average over unbound multipliers; otherwise the midpoint of the
    // interval of biases consistent with the bound multipliers.
    double final_bias() const {
        double sum = 0.0;
        int free_count = 0;
        double lower = -std::numeric_limits<double>::infinity();
        double upper = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m_; ++i) {
            const double target = y_[i] - f_[i];
            if (is_free(i)) {
                sum += target;
                ++free_count;
            } else if ((alpha_[i] == 0.0) == (y_[i] > 0)) {
                lower = std::max(lower, target);
            } else {
                upper = std::min(upper, target);
            }
        }
        if (free_count > 0) return sum / free_count;
        if (std::isinf(lower)) return upper;
        if (std::isinf(upper)) return lower;
        return 0.5 * (lower + upper);
    }

    const Matrix& k_;
    std::span<const int> y_;
    double c_;
    double tol_;
    std::size_t m_;
    std::vector<double> alpha_;
    std::vector<double> f_;  // sum_j alpha_j y_j K_ij
    double bias_ = 0.0;
    int steps_ = 0;
    int passes_ = 0;
};

void check_binary(std::span<const int> y) {
    bool pos = false, neg = false;
    for (int v : y) {
        if (v == 1) {
            pos = true;
        } else if (v == -1) {
            neg = true;
        } else {
            throw InvalidParams("binary labels must be -1 or +1");
        }
    }
    if (!pos || !neg) throw DegenerateLabels("training labels contain a single class");
}

}  // namespace

double rbf_kernel(std::span<const double> u, std::span<const double> v, double gamma) {
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double t = u[i] - v[i];
        d += t * t;
    }
    return std::exp(-gamma * d);
}

Matrix kernel_matrix(const Matrix& x, double gamma) {
    const std::size_t m = x.rows();
    Matrix k(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        k(i, i) = 1.0;
        for (std::size_t j = i + 1; j < m; ++j) {
            const double v = rbf_kernel(x.row(i), x.row(j), gamma);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

double SvmModel::decision(std::span<const double> f) const {
    double g = bias;
    for (std::size_t k = 0; k < support.size(); ++k) g += coef[k] * rbf_kernel(training->row(support[k]), f, gamma);
    return g;
}

SvmModel train_binary_svm(std::shared_ptr<const Matrix> x, const Matrix& kernel, std::span<const int> y,
                          const SvmParams& params) {
    const std::size_t m = y.size();
    if (x->rows() != m || kernel.rows() != m || kernel.cols() != m)
        throw LengthMismatch("SVM training inputs disagree in size");
    check_binary(y);
    if (!(params.c > 0.0) || !(params.gamma > 0.0)) throw InvalidParams("SVM C and gamma must be positive");

    SmoSolver solver(kernel, y, params.c, params.tol);
    solver.solve(params.pass_factor * static_cast<int>(m));

    SvmModel model;
    model.training = std::move(x);
    model.alpha = solver.alpha();
    model.bias = solver.bias();
    model.gamma = params.gamma;
    model.c = params.c;
    model.steps = solver.steps();
    model.passes = solver.passes();
    for (std::size_t i = 0; i < m; ++i) {
        if (model.alpha[i] > 0.0) {
            model.support.push_back(static_cast<int>(i));
            model.coef.push_back(model.alpha[i] * y[i]);
        }
    }
    return model;
}

SvmModel train_binary_svm(const Matrix& x, std::span<const int> y, const SvmParams& params) {
    auto shared = std::make_shared<const Matrix>(x);
    const Matrix kernel = kernel_matrix(*shared, params.gamma);
    return train_binary_svm(shared, kernel, y, params);
}

double dual_objective(const Matrix& kernel, std::span<const int> y, std::span<const double> alpha) {
    double linear = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        linear += alpha[i];
        for (std::size_t j = 0; j < alpha.size(); ++j) quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel(i, j);
    }
    return linear - 0.5 * quad;
}

double max_kkt_violation(const Matrix& kernel, std::span<const int> y, std::span<const double> alpha, double bias,
                         double c) {
    double worst = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        double g = bias;
        for (std::size_t j = 0; j < alpha.size(); ++j) g += alpha[j] * y[j] * kernel(i, j);
        const double margin = y[i] * g - 1.0;
        double v;
        if (alpha[i] <= kBoundEps) {
            v = std::max(0.0, -margin);
        } else if (alpha[i] >= c - kBoundEps) {
            v = std::max(0.0, margin);
        } else {
            v = std::abs(margin);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

}  // namespace spseg
