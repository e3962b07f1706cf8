#pragma once

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "spseg/image.hpp"

namespace spseg {

/// Column-wise z-score transform. Columns with std below 1e-12 map to 0.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;  // 0 for constant columns

    Matrix apply(const Matrix& x) const;
};

std::pair<Matrix, Standardizer> standardize(const Matrix& x);

double rbf_kernel(std::span<const double> u, std::span<const double> v, double gamma);

/// Symmetric Gram matrix K(i,j) = exp(-gamma * |x_i - x_j|^2).
Matrix kernel_matrix(const Matrix& x, double gamma);

struct SvmParams {
    double c = 1.0;
    double gamma = 0.001;
    double tol = 1e-3;    // KKT tolerance
    int pass_factor = 10; // at most pass_factor * M scans
};

/// Soft-margin RBF SVM trained by SMO. Support vectors are indices into the
/// shared training matrix.
struct SvmModel {
    std::shared_ptr<const Matrix> training;
    std::vector<double> alpha;    // one per training row
    std::vector<int> support;     // rows with alpha > 0
    std::vector<double> coef;     // alpha_i * y_i for each support row
    double bias = 0.0;
    double gamma = 0.0;
    double c = 0.0;
    int steps = 0;                // successful pair updates
    int passes = 0;

    double decision(std::span<const double> f) const;
};

/// Trains on `x` with labels in {-1,+1}. Throws DegenerateLabels when only
/// one class is present.
SvmModel train_binary_svm(const Matrix& x, std::span<const int> y, const SvmParams& params);

/// Same as above with a precomputed Gram matrix of `x`.
SvmModel train_binary_svm(std::shared_ptr<const Matrix> x, const Matrix& kernel,
                          std::span<const int> y, const SvmParams& params);

/// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double dual_objective(const Matrix& kernel, std::span<const int> y, std::span<const double> alpha);

/// Largest KKT violation of (alpha, bias) measured on y_i * g(x_i) - 1.
double max_kkt_violation(const Matrix& kernel, std::span<const int> y,
                         std::span<const double> alpha, double bias, double c);

/// p(y = +1 | score) = 1 / (1 + exp(a * score + b)).
struct PlattParams {
    double a = 0.0;
    double b = 0.0;

    double probability(double score) const;
};

/// Newton fit of the sigmoid against prior-corrected targets. Throws
/// DegenerateLabels unless both classes are present.
PlattParams platt_fit(std::span<const double> scores, std::span<const int> y);

/// Cross-entropy that platt_fit minimizes.
double platt_objective(std::span<const double> scores, std::span<const int> y, double a, double b);

struct BankEntry {
    int label = 0;
    SvmModel svm;
    PlattParams platt;
    bool trained = true;
};

/// One calibrated one-vs-all classifier per active label, ascending label ids.
struct ClassifierBank {
    Standardizer transform;
    std::shared_ptr<const Matrix> training;  // standardized rows shared by every model
    std::vector<BankEntry> entries;

    int size() const { return static_cast<int>(entries.size()); }
};

/// Trains one SVM per distinct label (positives are that label's rows) and
/// calibrates each on its in-sample scores. Features are standardized first;
/// the Gram matrix is shared across all labels. Throws SingleClass when only
/// one label is present.
ClassifierBank train_bank(const Matrix& x, std::span<const int> labels, const SvmParams& params);

/// M x K calibrated probabilities for raw (unstandardized) features. Entries
/// are floored at 1e-10 and each row is normalized to sum 1.
Matrix classify_all(const ClassifierBank& bank, const Matrix& x);

}  // namespace spseg
