#pragma once

#include "riskgraph/kernels.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace riskgraph::classify {

/// Dual solution of one soft-margin binary problem on a precomputed kernel.
struct SmoResult {
    std::vector<double> alpha; ///< box-constrained, 0 <= alpha_i <= C
    double bias = 0.0;         ///< decision f(x) = sum_i alpha_i y_i k(x_i, x) + bias
    double objective = 0.0;    ///< minimized dual value 1/2 a'Qa - e'a
    double kkt_gap = 0.0;      ///< final max-violating-pair gap m - M
    long iterations = 0;
};

/// Sequential minimal optimization for
///   min 1/2 a'Qa - e'a,   0 <= a_i <= C,   y'a = 0,   Q_ij = y_i y_j K_ij
/// using the first-order maximal-violating-pair working set and the
/// standard two-variable clipping update. `y` entries must be +1/-1.
/// Deterministic (no randomness, ties resolved to the smallest index);
/// throws TrainingError if the gap is still above `tol` at the iteration
/// cap.
SmoResult smo_solve(const Eigen::MatrixXd& K, const std::vector<int>& y, double C,
                    double tol = 1e-3);

/// One trained class pair. Decision >= 0 votes for the positive
/// (smaller-labelled) class.
struct BinaryModel {
    int positive_class = 0; ///< the smaller label of the pair (mapped to y = +1)
    int negative_class = 0; ///< the larger label (y = -1)
    std::vector<int> support;    ///< indices into the full training set
    std::vector<double> alpha_y; ///< alpha_i * y_i per support point
    double bias = 0.0;
    double kkt_gap = 0.0;
};

struct TrainedModel {
    std::vector<int> classes;       ///< ascending distinct training labels
    std::vector<BinaryModel> pairs; ///< one per unordered class pair, pairs ascending
    double C = 1.0;
    int training_size = 0;
    std::string kernel_digest; ///< digest of the kernel config that built the Gram
};

/// One-vs-one training on a precomputed Gram. The matrix is symmetry- and
/// PSD-checked first unless `check_psd` is false (for callers that already
/// validated the full matrix their slice came from). Fewer than two
/// distinct labels is a TrainingError.
TrainedModel train_svm(const kernels::KernelMatrix& gram, const std::vector<int>& labels,
                       double C, double tol = 1e-3, bool check_psd = true);

/// Decision value of one binary model given similarities of a sample to
/// every training point, in training order.
double decision_value(const BinaryModel& m, const std::vector<double>& kernel_row);

/// Majority vote over the class-pair models; vote ties go to the smallest
/// class label.
int predict(const TrainedModel& model, const std::vector<double>& kernel_row);

struct ConfusionMatrix {
    std::vector<int> classes;                   ///< ascending labels
    std::vector<std::vector<long long>> counts; ///< counts[target][output]

    long long total() const;
    double accuracy() const;        ///< trace / total
    double recall(std::size_t target_index) const;    ///< row-wise, 0 on an empty row
    double precision(std::size_t output_index) const; ///< column-wise, 0 on an empty column
};

/// Seed-deterministic stratified partition: per class (ascending), indices
/// are shuffled and dealt round-robin, the deal position carrying across
/// classes so per-class and overall fold sizes both differ by at most one.
/// A class with fewer members than folds is an error naming the class.
std::vector<std::vector<int>> stratified_folds(const std::vector<int>& labels, int folds,
                                               std::uint64_t seed);

struct CvResult {
    ConfusionMatrix confusion;
    std::vector<double> fold_accuracies;
    double mean_accuracy = 0.0;
};

/// Generic k-fold driver: builds stratified folds, calls
/// `run_fold(train_indices, test_indices)` — which must return one
/// predicted label per test index, in order — and aggregates the confusion
/// matrix and per-fold accuracies. Every sample is tested exactly once.
CvResult cross_validate(
    const std::vector<int>& labels, int folds, std::uint64_t seed,
    const std::function<std::vector<int>(const std::vector<int>&, const std::vector<int>&)>&
        run_fold);

/// Precomputed-kernel path: the full Gram is validated once, then sliced
/// per fold for training and prediction.
CvResult cross_validate_gram(const kernels::KernelMatrix& gram, const std::vector<int>& labels,
                             double C, int folds, std::uint64_t seed);

/// Vector-feature path: per-column normalization, then a linear-kernel
/// Gram through the identical train/evaluate machinery.
CvResult cross_validate_features(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                                 double C, int folds, std::uint64_t seed);

/// Model artifact: producer digest, classes, C, training size, kernel
/// digest, per-pair support/alpha_y/bias.
std::string write_model_json(const TrainedModel& model, const std::string& digest = "");
TrainedModel read_model_json(const std::string& text);

/// Report artifact: confusion counts, per-class precision/recall, overall
/// accuracy, per-fold accuracies, producer digest.
std::string write_report_json(const CvResult& cv, const std::string& digest);

/// Plot-friendly confusion export, one cell per line: "target,output,count".
std::string confusion_csv(const ConfusionMatrix& m);

} // namespace riskgraph::classify
