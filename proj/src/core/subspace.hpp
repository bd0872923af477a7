#pragma once

#include <cstddef>
#include <vector>

namespace mdgait::subspace {

/// PCA model: column-major basis whose columns are unit-norm principal
/// directions ordered by decreasing eigenvalue of the sample covariance.
struct SubspaceModel {
  std::size_t dim = 0;      // ambient dimension
  std::size_t rank = 0;     // number of retained components
  std::size_t n_train = 0;  // samples the fit consumed
  std::vector<double> mean;         // d
  std::vector<double> basis;        // d * rank, column-major
  std::vector<double> eigenvalues;  // rank, descending
  double total_variance = 0.0;      // trace of the sample covariance

  const double* basis_col(std::size_t j) const { return basis.data() + j * dim; }
};

// Fits PCA on row samples (all of equal length). The eigendecomposition runs
// on whichever Gram matrix is smaller — Y^T Y (d x d) or Y Y^T (n x n) — so
// image-sized vectors with few samples stay cheap. max_components = 0 keeps
// everything above numerical rank.
SubspaceModel fit_pca(const std::vector<std::vector<double>>& samples,
                      std::size_t max_components = 0);

// Projects x onto the first k components (k = 0 means the full rank).
std::vector<double> project(const SubspaceModel& model, const std::vector<double>& x,
                            std::size_t k = 0);

// Maps a coefficient vector back to the ambient space.
std::vector<double> reconstruct(const SubspaceModel& model, const std::vector<double>& z);

// Fraction of total variance captured by the first k components, in [0, 1].
double explained_variance(const SubspaceModel& model, std::size_t k);

}  // namespace mdgait::subspace
