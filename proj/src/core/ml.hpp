#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/subspace.hpp"

namespace mdgait::ml {

using ConfusionCounts = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;
/// Confusion entries may also be weights (e.g. row-normalized percentages):
/// every derived rate is a ratio of entries, so the scale cancels.
using ConfusionWeights = std::array<std::array<double, kNumClasses>, kNumClasses>;

// Brute-force kappa-nearest-neighbour vote with deterministic tie handling:
// neighbours are ordered by (distance, index); a tied vote resolves to the
// class of the nearest neighbour among the tied classes.
GaitClass knn_classify(const std::vector<std::vector<double>>& train_x,
                       const std::vector<GaitClass>& train_y, const std::vector<double>& query,
                       std::size_t k_neighbors);

// Stratified k-fold assignment: per-class index lists are shuffled with the
// seed and dealt round-robin, so fold class counts differ by at most one.
std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<GaitClass>& labels,
                                                       std::size_t n_folds, std::uint64_t seed);

// Leave-one-subject-out folds, one per distinct id (sorted for determinism).
std::vector<std::vector<std::size_t>> subject_folds(const std::vector<std::string>& subjects);

/// Screening metrics over a confusion matrix, rows = truth, columns =
/// prediction, class order NW, L1, L2, CW, CW/oos. The positive condition is
/// "assisted/impaired gait": a false positive is a normal walk labelled as
/// anything else, a false negative an impaired walk labelled normal, and the
/// (scalar) true positive rate is 1 - FNR.
struct Metrics {
  ConfusionWeights confusion{};  // as supplied: counts or weights
  double accuracy = 0.0;
  double false_positive_rate = 0.0;
  double false_negative_rate = 0.0;
  double true_positive_rate = 0.0;
  std::array<double, kNumClasses> per_class_accuracy{};  // diagonal / row sum
  double total = 0.0;
};

Metrics metrics_from_confusion(const ConfusionWeights& confusion);
Metrics metrics_from_confusion(const ConfusionCounts& confusion);

// Aligned truth/prediction sequences -> pooled metrics.
Metrics evaluate(const std::vector<GaitClass>& truths, const std::vector<GaitClass>& predictions);

struct CrossValResult {
  Metrics pooled;
  std::vector<double> fold_accuracies;
  double ci95_halfwidth = 0.0;  // 1.96 * sd(fold accuracies) / sqrt(n_folds)
};

// k-NN cross-validation in the given feature space. Folds must partition the
// dataset exactly; anything else (duplicate/missing/out-of-range index) is a
// hard error, since it silently leaks test data into training.
CrossValResult cross_validate(const std::vector<std::vector<double>>& features,
                              const std::vector<GaitClass>& labels,
                              const std::vector<std::vector<std::size_t>>& folds,
                              std::size_t k_neighbors);

// Cross-validation with a PCA front end fitted per fold on training rows
// only, evaluated at each subspace dimension in dims. The basis is fitted
// once per fold at max(dims); smaller dims reuse truncated projections,
// which is exact because principal components are nested. Dimensions beyond
// the achievable rank clamp to it. Results align with dims.
std::vector<CrossValResult> cross_validate_pca(const std::vector<std::vector<double>>& features,
                                               const std::vector<GaitClass>& labels,
                                               const std::vector<std::vector<std::size_t>>& folds,
                                               std::size_t k_neighbors,
                                               const std::vector<std::size_t>& dims);

}  // namespace mdgait::ml
