#include "spseg/classifier.hpp"

#include <algorithm>
#include <cmath>

#include "spseg/errors.hpp"

namespace spseg {
namespace {

constexpr double kStdFloor = 1e-12;
constexpr double kProbabilityFloor = 1e-10;

// log(1 + exp(-|z|)) based evaluation of the per-sample cross-entropy.
double sample_loss(double fapb, double target) {
    return fapb >= 0.0 ? target * fapb + std::log1p(std::exp(-fapb))
                       : (target - 1.0) * fapb + std::log1p(std::exp(fapb));
}

struct PlattTargets {
    std::vector<double> t;
    double hi = 0.0, lo = 0.0;
    int positives = 0, negatives = 0;
};

PlattTargets platt_targets(std::span<const double> scores, std::span<const int> y) {
    if (scores.size() != y.size()) throw LengthMismatch("scores and labels differ in length");
    PlattTargets pt;
    for (int v : y) (v > 0 ? pt.positives : pt.negatives)++;
    if (pt.positives == 0 || pt.negatives == 0) throw DegenerateLabels("Platt fit needs both classes");
    pt.hi = (pt.positives + 1.0) / (pt.positives + 2.0);
    pt.lo = 1.0 / (pt.negatives + 2.0);
    pt.t.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) pt.t[i] = y[i] > 0 ? pt.hi : pt.lo;
    return pt;
}

double objective_with_targets(std::span<const double> scores, const std::vector<double>& t, double a, double b) {
    double f = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) f += sample_loss(scores[i] * a + b, t[i]);
    return f;
}

}  // namespace

std::pair<Matrix, Standardizer> standardize(const Matrix& x) {
    const std::size_t m = x.rows(), d = x.cols();
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 0.0);
    if (m == 0) return {x, s};
    for (std::size_t j = 0; j < d; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) sum += x(i, j);
        const double mean = sum / static_cast<double>(m);
        double var = 0.0;
        for (std::size_t i = 0; i < m; ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
        const double sd = std::sqrt(var / static_cast<double>(m));
        s.mean[j] = mean;
        s.scale[j] = sd < kStdFloor ? 0.0 : 1.0 / sd;
    }
    return {s.apply(x), s};
}

Matrix Standardizer::apply(const Matrix& x) const {
    if (x.cols() != mean.size()) throw LengthMismatch("feature width differs from the standardizer");
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = (x(i, j) - mean[j]) * scale[j];
    return out;
}

double PlattParams::probability(double score) const {
    const double fapb = score * a + b;
    return fapb >= 0.0 ? std::exp(-fapb) / (1.0 + std::exp(-fapb)) : 1.0 / (1.0 + std::exp(fapb));
}

double platt_objective(std::span<const double> scores, std::span<const int> y, double a, double b) {
    const PlattTargets pt = platt_targets(scores, y);
    return objective_with_targets(scores, pt.t, a, b);
}

PlattParams platt_fit(std::span<const double> scores, std::span<const int> y) {
    const PlattTargets pt = platt_targets(scores, y);
    constexpr int kMaxIters = 100;
    constexpr double kMinStep = 1e-10;
    constexpr double kSigma = 1e-12;  // Hessian ridge
    constexpr double kTol = 1e-10;

    double a = 0.0;
    double b = std::log((pt.negatives + 1.0) / (pt.positives + 1.0));
    double fval = objective_with_targets(scores, pt.t, a, b);

    for (int iter = 0; iter < kMaxIters; ++iter) {
        double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const double fapb = scores[i] * a + b;
            double p, q;
            if (fapb >= 0.0) {
                p = std::exp(-fapb) / (1.0 + std::exp(-fapb));
                q = 1.0 / (1.0 + std::exp(-fapb));
            } else {
                p = 1.0 / (1.0 + std::exp(fapb));
                q = std::exp(fapb) / (1.0 + std::exp(fapb));
            }
            const double d2 = p * q;
            h11 += scores[i] * scores[i] * d2;
            h22 += d2;
            h21 += scores[i] * d2;
            const double d1 = pt.t[i] - p;
            g1 += scores[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < kTol && std::abs(g2) < kTol) break;

        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;

        double step = 1.0;
        bool accepted = false;
        while (step >= kMinStep) {
            const double na = a + step * da, nb = b + step * db;
            const double nf = objective_with_targets(scores, pt.t, na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        if (std::max(std::abs(step * da), std::abs(step * db)) < kTol) break;
    }
    return {a, b};
}

ClassifierBank train_bank(const Matrix& x, std::span<const int> labels, const SvmParams& params) {
    if (labels.size() != x.rows()) throw LengthMismatch("one label per feature row required");
    std::vector<int> distinct(labels.begin(), labels.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2) throw SingleClass("only one active label");

    auto [standardized, transform] = standardize(x);
    auto training = std::make_shared<const Matrix>(std::move(standardized));
    const Matrix kernel = kernel_matrix(*training, params.gamma);
    const std::size_t m = labels.size();

    ClassifierBank bank;
    bank.transform = std::move(transform);
    bank.training = training;
    bank.entries.reserve(distinct.size());
    std::vector<int> y(m);
    std::vector<double> scores(m);
    for (int label : distinct) {
        for (std::size_t i = 0; i < m; ++i) y[i] = labels[i] == label ? 1 : -1;
        BankEntry entry;
        entry.label = label;
        try {
            entry.svm = train_binary_svm(training, kernel, y, params);
            for (std::size_t i = 0; i < m; ++i) {
                double g = entry.svm.bias;
                for (std::size_t k = 0; k < entry.svm.support.size(); ++k)
                    g += entry.svm.coef[k] * kernel(i, entry.svm.support[k]);
                scores[i] = g;
            }
            entry.platt = platt_fit(scores, y);
        } catch (const DegenerateLabels&) {
            entry.trained = false;
        }
        bank.entries.push_back(std::move(entry));
    }
    return bank;
}

Matrix classify_all(const ClassifierBank& bank, const Matrix& x) {
    const Matrix xs = bank.transform.apply(x);
    const std::size_t n = xs.rows();
    const std::size_t k = bank.entries.size();
    Matrix probs(n, k, kProbabilityFloor);
    if (k == 0) return probs;

    const Matrix& train = *bank.training;
    const double gamma = bank.entries.front().svm.gamma;
    std::vector<double> cross(train.rows());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < train.rows(); ++t) cross[t] = rbf_kernel(train.row(t), xs.row(i), gamma);
        double total = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const BankEntry& e = bank.entries[j];
            double p = 0.0;
            if (e.trained) {
                double g = e.svm.bias;
                for (std::size_t s = 0; s < e.svm.support.size(); ++s) g += e.svm.coef[s] * cross[e.svm.support[s]];
                p = e.platt.probability(g);
            }
            p = std::max(p, kProbabilityFloor);
            probs(i, j) = p;
            total += p;
        }
        for (std::size_t j = 0; j < k; ++j) probs(i, j) /= total;
    }
    return probs;
}

}  // namespace spseg
