#pragma once

// Spectral features for a single view: RBF affinity, normalized Laplacian,
// and the low non-constant eigenvectors of it, standardized per column.

#include "mvcc/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvcc {

struct EmbeddingConfig {
  double sigma = 1.0;
  std::size_t out_dims = 0;  // 0 picks ceil(sqrt(input dims))
  bool standardize = true;
};

struct Embedding {
  ViewData view;
  std::vector<double> eigenvalues;  // of the kept columns, ascending
  std::vector<std::string> notes;
};

inline std::size_t default_embedding_dims(std::size_t input_dims) {
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(input_dims))));
}

/// A(i,j) = exp(-|xi - xj|^2 / (2 sigma^2)).
inline Matrix affinity(const ViewData& view, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive");
  const Matrix& x = view.instances();
  const Eigen::Index n = x.rows();
  Matrix a(n, n);
  const double scale = 1.0 / (2.0 * sigma * sigma);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::exp(-(x.row(i) - x.row(j)).squaredNorm() * scale);
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  return a;
}

/// L = I - D^-1/2 A D^-1/2.
inline Matrix laplacian(const Matrix& affinity) {
  if (affinity.rows() != affinity.cols()) throw std::invalid_argument("affinity must be square");
  const Vector degree = affinity.rowwise().sum();
  for (Eigen::Index i = 0; i < degree.size(); ++i)
    if (!(degree(i) > 0.0)) throw std::domain_error("row " + std::to_string(i) + " has zero degree");
  const Vector inv_sqrt = degree.array().rsqrt();
  Matrix l = -(inv_sqrt.asDiagonal() * affinity * inv_sqrt.asDiagonal());
  l.diagonal().array() += 1.0;
  // exact symmetry regardless of rounding in the products
  return 0.5 * (l + l.transpose());
}

namespace detail {

inline void fix_sign(Eigen::Ref<Vector> v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);  // first index of the largest magnitude
  if (v(arg) < 0.0) v = -v;
}

inline bool lex_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return false;
}

}  // namespace detail

/// Keeps eigenvectors 2..d+1 of the normalized Laplacian (ascending
/// eigenvalue). Each column's largest-magnitude entry is made positive;
/// columns of a tied eigenvalue block are sorted descending lexicographically
/// and a note is recorded.
inline Embedding spectral_embed(const ViewData& view, const EmbeddingConfig& cfg = {}) {
  const std::size_t n = view.size();
  const std::size_t d = cfg.out_dims == 0 ? default_embedding_dims(view.dim()) : cfg.out_dims;
  if (d + 1 > n)
    throw std::invalid_argument("embedding needs at least d + 1 = " + std::to_string(d + 1) + " instances, view '" +
                                view.id() + "' has " + std::to_string(n));

  const Matrix lap = laplacian(affinity(view, cfg.sigma));
  Eigen::SelfAdjointEigenSolver<Matrix> solver(lap);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const Vector& evals = solver.eigenvalues();
  Matrix evecs = solver.eigenvectors();
  for (Eigen::Index c = 0; c < evecs.cols(); ++c) detail::fix_sign(evecs.col(c));

  Embedding out;
  const double tie_tol = 1e-10;
  Eigen::Index start = 0;
  while (start < static_cast<Eigen::Index>(n)) {
    Eigen::Index stop = start + 1;
    while (stop < static_cast<Eigen::Index>(n) && evals(stop) - evals(stop - 1) <= tie_tol) ++stop;
    if (stop - start > 1) {
      std::vector<Vector> block;
      for (Eigen::Index c = start; c < stop; ++c) block.emplace_back(evecs.col(c));
      std::sort(block.begin(), block.end(), [](const Vector& a, const Vector& b) { return detail::lex_less(b, a); });
      for (Eigen::Index c = start; c < stop; ++c) evecs.col(c) = block[static_cast<std::size_t>(c - start)];
      // a tie only matters if it straddles or sits inside the kept range
      if (stop > 1 && start <= static_cast<Eigen::Index>(d))
        out.notes.push_back("eigenvalues " + std::to_string(start + 1) + ".." + std::to_string(stop) +
                            " are tied near " + std::to_string(evals(start)) + "; column order within the block is by convention");
    }
    start = stop;
  }

  Matrix features = evecs.middleCols(1, static_cast<Eigen::Index>(d));
  for (std::size_t c = 0; c < d; ++c) out.eigenvalues.push_back(evals(static_cast<Eigen::Index>(c + 1)));
  if (cfg.standardize) {
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      auto col = features.col(c);
      const double mean = col.mean();
      col.array() -= mean;
      const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n));
      if (sd > 0.0) {
        col /= sd;
      } else {
        out.notes.push_back("feature " + std::to_string(c) + " is constant and was only centered");
      }
    }
  }
  out.view = ViewData(view.id(), std::move(features), view.ids(), view.maybe_labels());
  return out;
}

}  // namespace mvcc
