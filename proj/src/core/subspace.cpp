#include "core/subspace.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mdgait::subspace {
namespace {

/// Largest-magnitude entry of each basis column is made positive so the
/// decomposition is deterministic across eigensolver sign choices.
void canonicalise_signs(Eigen::MatrixXd& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index idx = 0;
    basis.col(j).cwiseAbs().maxCoeff(&idx);
    if (basis(idx, j) < 0.0) basis.col(j) = -basis.col(j);
  }
}

}  // namespace

SubspaceModel fit_pca(const std::vector<std::vector<double>>& samples,
                      std::size_t max_components) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("fit_pca: need at least two samples");
  const std::size_t d = samples[0].size();
  if (d == 0) throw std::invalid_argument("fit_pca: empty feature vectors");
  for (const auto& s : samples) {
    if (s.size() != d) throw std::invalid_argument("fit_pca: inconsistent sample lengths");
  }

  Eigen::MatrixXd y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = samples[i][j];
  }
  const Eigen::RowVectorXd mean = y.colwise().mean();
  y.rowwise() -= mean;

  const double denom = static_cast<double>(n - 1);
  Eigen::MatrixXd basis;           // d x r, unit columns
  Eigen::VectorXd gram_eigs;       // descending, eigenvalues of the Gram matrix

  if (d <= n) {
    const Eigen::MatrixXd cov = y.transpose() * y;  // d x d
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw std::runtime_error("fit_pca: eigensolver failed");
    // SelfAdjointEigenSolver returns ascending order.
    basis = es.eigenvectors().rowwise().reverse();
    gram_eigs = es.eigenvalues().reverse();
  } else {
    const Eigen::MatrixXd gram = y * y.transpose();  // n x n
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    if (es.info() != Eigen::Success) throw std::runtime_error("fit_pca: eigensolver failed");
    const Eigen::MatrixXd v = es.eigenvectors().rowwise().reverse();
    gram_eigs = es.eigenvalues().reverse();
    // Lift Gram eigenvectors to ambient space: u_j = Y^T v_j / sigma_j.
    basis.resize(static_cast<Eigen::Index>(d), gram_eigs.size());
    for (Eigen::Index j = 0; j < gram_eigs.size(); ++j) {
      const double sigma = std::sqrt(std::max(gram_eigs(j), 0.0));
      if (sigma > 0.0) {
        basis.col(j) = (y.transpose() * v.col(j)) / sigma;
      } else {
        basis.col(j).setZero();
      }
    }
  }

  // Numerical rank: drop directions whose variance is negligible relative to
  // the leading one (they are noise from the eigensolver).
  const double max_eig = gram_eigs.size() > 0 ? std::max(gram_eigs(0), 0.0) : 0.0;
  const double tol = max_eig * 1e-12;
  std::size_t rank = 0;
  for (Eigen::Index j = 0; j < gram_eigs.size(); ++j) {
    if (gram_eigs(j) > tol && gram_eigs(j) > 0.0) ++rank;
  }
  rank = std::min<std::size_t>(rank, std::min(d, n - 1));
  if (max_components > 0) rank = std::min(rank, max_components);
  if (rank == 0) throw std::runtime_error("fit_pca: data has no variance");

  Eigen::MatrixXd kept = basis.leftCols(static_cast<Eigen::Index>(rank));
  canonicalise_signs(kept);

  SubspaceModel model;
  model.dim = d;
  model.rank = rank;
  model.n_train = n;
  model.mean.assign(mean.data(), mean.data() + d);
  model.basis.resize(d * rank);
  for (std::size_t j = 0; j < rank; ++j) {
    for (std::size_t i = 0; i < d; ++i) {
      model.basis[j * d + i] = kept(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  model.eigenvalues.resize(rank);
  for (std::size_t j = 0; j < rank; ++j) model.eigenvalues[j] = gram_eigs(static_cast<Eigen::Index>(j)) / denom;
  model.total_variance = y.squaredNorm() / denom;
  return model;
}

std::vector<double> project(const SubspaceModel& model, const std::vector<double>& x,
                            std::size_t k) {
  if (x.size() != model.dim) throw std::invalid_argument("project: dimension mismatch");
  if (k == 0) k = model.rank;
  if (k > model.rank) throw std::invalid_argument("project: k exceeds model rank");
  std::vector<double> z(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    const double* col = model.basis_col(j);
    double acc = 0.0;
    for (std::size_t i = 0; i < model.dim; ++i) acc += col[i] * (x[i] - model.mean[i]);
    z[j] = acc;
  }
  return z;
}

std::vector<double> reconstruct(const SubspaceModel& model, const std::vector<double>& z) {
  if (z.size() > model.rank) throw std::invalid_argument("reconstruct: too many coefficients");
  std::vector<double> x = model.mean;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double* col = model.basis_col(j);
    for (std::size_t i = 0; i < model.dim; ++i) x[i] += z[j] * col[i];
  }
  return x;
}

double explained_variance(const SubspaceModel& model, std::size_t k) {
  if (k > model.rank) throw std::invalid_argument("explained_variance: k exceeds model rank");
  if (!(model.total_variance > 0.0)) return 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < k; ++j) acc += model.eigenvalues[j];
  return std::min(1.0, acc / model.total_variance);
}

}  // namespace mdgait::subspace
