#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>

namespace minsphere {

struct EigenOptions {
  int count = 10;              ///< number of smallest eigenpairs wanted
  double shift = -1.0;         ///< must lie below the smallest eigenvalue
  int guard_vectors = 12;      ///< extra subspace columns beyond `count`
  int max_iterations = 2000;
  double tolerance = 1e-9;     ///< relative residual per wanted pair
  std::uint64_t seed = 7;
  int dense_threshold = 600;   ///< problems up to this size are solved densely
};

struct EigenResult {
  Eigen::VectorXd values;      ///< ascending
  Eigen::MatrixXd vectors;     ///< B-orthonormal columns (symmetric case)
  Eigen::VectorXd imaginary;   ///< imaginary parts (non-symmetric case only)
  bool converged = false;
  int iterations = 0;
  double max_residual = 0.0;
};

/// Smallest eigenpairs of the symmetric pencil A x = lambda B x with B positive
/// definite, by shift-invert subspace iteration with Rayleigh-Ritz.
/// A - shift*B must be positive definite.
EigenResult smallest_eigenpairs(const Eigen::SparseMatrix<double>& a,
                                const Eigen::SparseMatrix<double>& b, const EigenOptions& options);

/// Eigenvalues of smallest real part of a non-symmetric pencil whose spectrum
/// is (close to) real, e.g. a Petrov-Galerkin discretisation of a self-adjoint
/// operator. Vectors are not returned.
EigenResult smallest_eigenvalues_nonsymmetric(const Eigen::SparseMatrix<double>& a,
                                              const Eigen::SparseMatrix<double>& b,
                                              const EigenOptions& options);

}  // namespace minsphere
