#include "core/ml.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace mdgait::ml {
namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b,
                        std::size_t dims) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dims; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void check_partition(std::size_t n, const std::vector<std::vector<std::size_t>>& folds) {
  std::vector<std::uint8_t> seen(n, 0);
  std::size_t covered = 0;
  for (const auto& fold : folds) {
    if (fold.empty()) throw std::invalid_argument("cross_validate: empty fold");
    for (std::size_t idx : fold) {
      if (idx >= n) throw std::invalid_argument("cross_validate: fold index out of range");
      if (seen[idx] != 0) {
        throw std::invalid_argument("cross_validate: sample assigned to two folds");
      }
      seen[idx] = 1;
      ++covered;
    }
  }
  if (covered != n) {
    throw std::invalid_argument("cross_validate: folds do not cover the dataset");
  }
}

double ci95(const std::vector<double>& fold_acc) {
  const std::size_t k = fold_acc.size();
  if (k < 2) return 0.0;
  const double mean =
      std::accumulate(fold_acc.begin(), fold_acc.end(), 0.0) / static_cast<double>(k);
  double ss = 0.0;
  for (double a : fold_acc) ss += (a - mean) * (a - mean);
  const double sd = std::sqrt(ss / static_cast<double>(k - 1));
  return 1.96 * sd / std::sqrt(static_cast<double>(k));
}

/// k-NN over pre-extracted rows, restricted to the first `dims` coordinates.
GaitClass knn_vote(const std::vector<const std::vector<double>*>& train_x,
                   const std::vector<GaitClass>& train_y, const std::vector<double>& query,
                   std::size_t k_neighbors, std::size_t dims) {
  const std::size_t n = train_x.size();
  std::vector<std::pair<double, std::size_t>> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    order[i] = {squared_distance(*train_x[i], query, dims), i};
  }
  const std::size_t k = std::min(k_neighbors, n);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end());

  std::array<std::size_t, kNumClasses> votes{};
  for (std::size_t i = 0; i < k; ++i) {
    ++votes[static_cast<std::size_t>(train_y[order[i].second])];
  }
  const std::size_t top = *std::max_element(votes.begin(), votes.end());
  // Ties resolve to whichever tied class owns the single nearest neighbour.
  for (std::size_t i = 0; i < k; ++i) {
    const auto cls = static_cast<std::size_t>(train_y[order[i].second]);
    if (votes[cls] == top) return static_cast<GaitClass>(cls);
  }
  return train_y[order[0].second];  // unreachable: k >= 1
}

}  // namespace

GaitClass knn_classify(const std::vector<std::vector<double>>& train_x,
                       const std::vector<GaitClass>& train_y, const std::vector<double>& query,
                       std::size_t k_neighbors) {
  if (train_x.empty() || train_x.size() != train_y.size()) {
    throw std::invalid_argument("knn_classify: bad training set");
  }
  if (k_neighbors == 0) throw std::invalid_argument("knn_classify: k must be >= 1");
  if (k_neighbors > train_x.size()) {
    throw std::invalid_argument("knn_classify: k exceeds training-set size");
  }
  std::vector<const std::vector<double>*> rows(train_x.size());
  for (std::size_t i = 0; i < train_x.size(); ++i) {
    if (train_x[i].size() != query.size()) {
      throw std::invalid_argument("knn_classify: dimension mismatch");
    }
    rows[i] = &train_x[i];
  }
  return knn_vote(rows, train_y, query, k_neighbors, query.size());
}

std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<GaitClass>& labels,
                                                       std::size_t n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw std::invalid_argument("stratified_folds: need >= 2 folds");
  if (labels.size() < n_folds) {
    throw std::invalid_argument("stratified_folds: more folds than samples");
  }
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> folds(n_folds);
  for (auto& indices : by_class) {
    // Fisher-Yates, then deal round-robin so per-fold class counts are even.
    for (std::size_t i = indices.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
      std::swap(indices[i - 1], indices[std::min(j, i - 1)]);
    }
    for (std::size_t i = 0; i < indices.size(); ++i) {
      folds[i % n_folds].push_back(indices[i]);
    }
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

std::vector<std::vector<std::size_t>> subject_folds(const std::vector<std::string>& subjects) {
  if (subjects.empty()) throw std::invalid_argument("subject_folds: empty subject list");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    if (subjects[i].empty()) {
      throw std::invalid_argument("subject_folds: sample without a subject id");
    }
    groups[subjects[i]].push_back(i);
  }
  if (groups.size() < 2) {
    throw std::invalid_argument("subject_folds: need at least two subjects");
  }
  std::vector<std::vector<std::size_t>> folds;
  folds.reserve(groups.size());
  for (auto& [id, indices] : groups) folds.push_back(std::move(indices));
  return folds;
}

Metrics metrics_from_confusion(const ConfusionWeights& confusion) {
  Metrics m;
  m.confusion = confusion;
  double correct = 0.0;
  double normal_total = 0.0;
  double normal_escaped = 0.0;  // true normal walks predicted impaired
  double impaired_total = 0.0;
  double impaired_missed = 0.0;  // true impaired walks predicted normal
  const auto nw = static_cast<std::size_t>(GaitClass::NW);
  for (std::size_t t = 0; t < kNumClasses; ++t) {
    double row = 0.0;
    for (std::size_t p = 0; p < kNumClasses; ++p) {
      const double w = confusion[t][p];
      if (w < 0.0) throw std::invalid_argument("metrics: negative confusion entry");
      row += w;
      m.total += w;
      if (t == p) correct += w;
      if (t == nw && p != nw) normal_escaped += w;
      if (t != nw && p == nw) impaired_missed += w;
    }
    if (t == nw) {
      normal_total = row;
    } else {
      impaired_total += row;
    }
    m.per_class_accuracy[t] = row > 0.0 ? confusion[t][t] / row : 0.0;
  }
  if (!(m.total > 0.0)) throw std::invalid_argument("metrics: empty confusion matrix");
  m.accuracy = correct / m.total;
  m.false_positive_rate = normal_total > 0.0 ? normal_escaped / normal_total : 0.0;
  m.false_negative_rate = impaired_total > 0.0 ? impaired_missed / impaired_total : 0.0;
  m.true_positive_rate = 1.0 - m.false_negative_rate;
  return m;
}

Metrics metrics_from_confusion(const ConfusionCounts& confusion) {
  ConfusionWeights weights{};
  for (std::size_t t = 0; t < kNumClasses; ++t) {
    for (std::size_t p = 0; p < kNumClasses; ++p) {
      weights[t][p] = static_cast<double>(confusion[t][p]);
    }
  }
  return metrics_from_confusion(weights);
}

Metrics evaluate(const std::vector<GaitClass>& truths, const std::vector<GaitClass>& predictions) {
  if (truths.empty() || truths.size() != predictions.size()) {
    throw std::invalid_argument("evaluate: need aligned non-empty sequences");
  }
  ConfusionCounts confusion{};
  for (std::size_t i = 0; i < truths.size(); ++i) {
    ++confusion[static_cast<std::size_t>(truths[i])][static_cast<std::size_t>(predictions[i])];
  }
  return metrics_from_confusion(confusion);
}

CrossValResult cross_validate(const std::vector<std::vector<double>>& features,
                              const std::vector<GaitClass>& labels,
                              const std::vector<std::vector<std::size_t>>& folds,
                              std::size_t k_neighbors) {
  const std::size_t n = features.size();
  if (n == 0 || n != labels.size()) throw std::invalid_argument("cross_validate: bad dataset");
  check_partition(n, folds);
  if (folds.size() < 2) throw std::invalid_argument("cross_validate: need >= 2 folds");

  ConfusionCounts confusion{};
  CrossValResult result;
  result.fold_accuracies.reserve(folds.size());

  std::vector<std::uint8_t> in_test(n, 0);
  for (const auto& fold : folds) {
    std::fill(in_test.begin(), in_test.end(), 0);
    for (std::size_t idx : fold) in_test[idx] = 1;

    std::vector<const std::vector<double>*> train_x;
    std::vector<GaitClass> train_y;
    train_x.reserve(n - fold.size());
    train_y.reserve(n - fold.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (in_test[i] == 0) {
        train_x.push_back(&features[i]);
        train_y.push_back(labels[i]);
      }
    }
    if (train_x.empty()) throw std::invalid_argument("cross_validate: fold leaves no training data");

    std::size_t correct = 0;
    for (std::size_t idx : fold) {
      const GaitClass predicted =
          knn_vote(train_x, train_y, features[idx], k_neighbors, features[idx].size());
      ++confusion[static_cast<std::size_t>(labels[idx])][static_cast<std::size_t>(predicted)];
      if (predicted == labels[idx]) ++correct;
    }
    result.fold_accuracies.push_back(static_cast<double>(correct) /
                                     static_cast<double>(fold.size()));
  }
  result.pooled = metrics_from_confusion(confusion);
  result.ci95_halfwidth = ci95(result.fold_accuracies);
  return result;
}

std::vector<CrossValResult> cross_validate_pca(const std::vector<std::vector<double>>& features,
                                               const std::vector<GaitClass>& labels,
                                               const std::vector<std::vector<std::size_t>>& folds,
                                               std::size_t k_neighbors,
                                               const std::vector<std::size_t>& dims) {
  const std::size_t n = features.size();
  if (n == 0 || n != labels.size()) throw std::invalid_argument("cross_validate_pca: bad dataset");
  if (dims.empty()) throw std::invalid_argument("cross_validate_pca: no dimensions requested");
  for (std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("cross_validate_pca: dimension must be >= 1");
  }
  check_partition(n, folds);
  if (folds.size() < 2) throw std::invalid_argument("cross_validate_pca: need >= 2 folds");
  const std::size_t max_dim = *std::max_element(dims.begin(), dims.end());

  struct FoldTally {
    ConfusionCounts confusion{};
    std::vector<double> fold_accuracies;
  };
  std::vector<FoldTally> tallies(dims.size());

  std::vector<std::uint8_t> in_test(n, 0);
  for (const auto& fold : folds) {
    std::fill(in_test.begin(), in_test.end(), 0);
    for (std::size_t idx : fold) in_test[idx] = 1;

    std::vector<std::vector<double>> train_raw;
    std::vector<GaitClass> train_y;
    train_raw.reserve(n - fold.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (in_test[i] == 0) {
        train_raw.push_back(features[i]);
        train_y.push_back(labels[i]);
      }
    }
    if (train_raw.size() < 2) {
      throw std::invalid_argument("cross_validate_pca: fold leaves too little training data");
    }

    // The subspace is learned strictly from the training rows of this fold.
    const subspace::SubspaceModel model = subspace::fit_pca(train_raw, max_dim);

    std::vector<std::vector<double>> train_z(train_raw.size());
    for (std::size_t i = 0; i < train_raw.size(); ++i) {
      train_z[i] = subspace::project(model, train_raw[i]);
    }
    std::vector<const std::vector<double>*> train_rows(train_z.size());
    for (std::size_t i = 0; i < train_z.size(); ++i) train_rows[i] = &train_z[i];

    std::vector<std::vector<double>> test_z(fold.size());
    for (std::size_t i = 0; i < fold.size(); ++i) {
      test_z[i] = subspace::project(model, features[fold[i]]);
    }

    for (std::size_t di = 0; di < dims.size(); ++di) {
      const std::size_t d_eff = std::min(dims[di], model.rank);
      std::size_t correct = 0;
      for (std::size_t i = 0; i < fold.size(); ++i) {
        const GaitClass truth = labels[fold[i]];
        const GaitClass predicted = knn_vote(train_rows, train_y, test_z[i], k_neighbors, d_eff);
        ++tallies[di].confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
        if (predicted == truth) ++correct;
      }
      tallies[di].fold_accuracies.push_back(static_cast<double>(correct) /
                                            static_cast<double>(fold.size()));
    }
  }

  std::vector<CrossValResult> results(dims.size());
  for (std::size_t di = 0; di < dims.size(); ++di) {
    results[di].pooled = metrics_from_confusion(tallies[di].confusion);
    results[di].fold_accuracies = std::move(tallies[di].fold_accuracies);
    results[di].ci95_halfwidth = ci95(results[di].fold_accuracies);
  }
  return results;
}

}  // namespace mdgait::ml
