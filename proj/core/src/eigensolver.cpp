#include "minsphere/eigensolver.hpp"

#include "minsphere/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace minsphere {

namespace {

Eigen::MatrixXd random_block(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) x(i, j) = normal(rng);
  return x;
}

// Make the columns of y orthonormal in the inner product of b (Cholesky QR, twice).
bool b_orthonormalize(Eigen::MatrixXd& y, const Eigen::SparseMatrix<double>& b) {
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::MatrixXd gram = y.transpose() * (b * y);
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (gram + gram.transpose()));
    if (llt.info() != Eigen::Success) return false;
    y = llt.matrixU().solve<Eigen::OnTheRight>(y);
  }
  return true;
}

void b_gram_schmidt(Eigen::MatrixXd& y, const Eigen::SparseMatrix<double>& b, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index i = 0; i < j; ++i) {
          const double proj = y.col(i).dot(b * y.col(j));
          y.col(j) -= proj * y.col(i);
        }
      }
      const double norm = std::sqrt(std::max(0.0, y.col(j).dot(b * y.col(j))));
      if (norm > 1e-10) {
        y.col(j) /= norm;
        break;
      }
      for (Eigen::Index i = 0; i < y.rows(); ++i) y(i, j) = normal(rng);
    }
  }
}

EigenResult dense_symmetric(const Eigen::SparseMatrix<double>& a,
                            const Eigen::SparseMatrix<double>& b, int count) {
  const Eigen::MatrixXd ad = Eigen::MatrixXd(a);
  const Eigen::MatrixXd bd = Eigen::MatrixXd(b);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      0.5 * (ad + ad.transpose()), 0.5 * (bd + bd.transpose()));
  if (solver.info() != Eigen::Success) throw NumericError("dense generalized eigensolver failed");
  EigenResult out;
  const int k = std::min<int>(count, static_cast<int>(ad.rows()));
  out.values = solver.eigenvalues().head(k);
  out.vectors = solver.eigenvectors().leftCols(k);
  out.converged = true;
  return out;
}

}  // namespace

EigenResult smallest_eigenpairs(const Eigen::SparseMatrix<double>& a,
                                const Eigen::SparseMatrix<double>& b, const EigenOptions& options) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n || b.cols() != n) {
    throw PreconditionError("smallest_eigenpairs: dimension mismatch");
  }
  if (options.count < 1) throw PreconditionError("smallest_eigenpairs: count must be positive");
  if (n <= options.dense_threshold || options.count + options.guard_vectors >= n) {
    return dense_symmetric(a, b, options.count);
  }

  const Eigen::SparseMatrix<double> shifted = a - options.shift * b;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor(shifted);
  if (factor.info() != Eigen::Success) {
    throw NumericError("smallest_eigenpairs: factorisation of the shifted pencil failed");
  }

  const int k = options.count;
  const int p = k + options.guard_vectors;
  Eigen::MatrixXd x = random_block(n, p, options.seed);
  if (!b_orthonormalize(x, b)) b_gram_schmidt(x, b, options.seed + 1);

  EigenResult out;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    Eigen::MatrixXd y = factor.solve(b * x);
    if (factor.info() != Eigen::Success) throw NumericError("smallest_eigenpairs: solve failed");
    if (!b_orthonormalize(y, b)) b_gram_schmidt(y, b, options.seed + iter + 1);

    const Eigen::MatrixXd projected = y.transpose() * (a * y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(0.5 * (projected + projected.transpose()));
    x = y * ritz.eigenvectors();

    const Eigen::MatrixXd ax = a * x.leftCols(k);
    const Eigen::MatrixXd bx = b * x.leftCols(k);
    double worst = 0.0;
    for (int j = 0; j < k; ++j) {
      const double lambda = ritz.eigenvalues()[j];
      // The shift keeps the scale away from zero for (near) null vectors.
      const double scale =
          ax.col(j).norm() + (std::abs(lambda) + std::abs(options.shift) + 1.0) * bx.col(j).norm();
      worst = std::max(worst, (ax.col(j) - lambda * bx.col(j)).norm() / scale);
    }
    out.values = ritz.eigenvalues().head(k);
    out.iterations = iter;
    out.max_residual = worst;
    if (worst <= options.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.vectors = x.leftCols(k);
  return out;
}

EigenResult smallest_eigenvalues_nonsymmetric(const Eigen::SparseMatrix<double>& a,
                                              const Eigen::SparseMatrix<double>& b,
                                              const EigenOptions& options) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n || b.cols() != n) {
    throw PreconditionError("smallest_eigenvalues_nonsymmetric: dimension mismatch");
  }
  const int k = options.count;
  auto sorted_pairs = [k](const Eigen::VectorXcd& lambda) {
    std::vector<int> order(lambda.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return lambda[i].real() < lambda[j].real(); });
    EigenResult r;
    const int m = std::min<int>(k, static_cast<int>(lambda.size()));
    r.values.resize(m);
    r.imaginary.resize(m);
    for (int i = 0; i < m; ++i) {
      r.values[i] = lambda[order[i]].real();
      r.imaginary[i] = lambda[order[i]].imag();
    }
    return r;
  };

  if (n <= options.dense_threshold || k + options.guard_vectors >= n) {
    Eigen::MatrixXd bd = Eigen::MatrixXd(b);
    Eigen::MatrixXd ad = Eigen::MatrixXd(a);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(bd.lu().solve(ad), false);
    if (solver.info() != Eigen::Success) throw NumericError("dense eigensolver failed");
    EigenResult r = sorted_pairs(solver.eigenvalues());
    r.converged = true;
    return r;
  }

  const Eigen::SparseMatrix<double> shifted = a - options.shift * b;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> factor;
  factor.analyzePattern(shifted);
  factor.factorize(shifted);
  if (factor.info() != Eigen::Success) {
    throw NumericError("smallest_eigenvalues_nonsymmetric: factorisation failed");
  }

  const int p = k + options.guard_vectors;
  Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(random_block(n, p, options.seed))
                          .householderQ() *
                      Eigen::MatrixXd::Identity(n, p);
  EigenResult out;
  Eigen::VectorXd previous = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::infinity());
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    Eigen::MatrixXd y = factor.solve(b * q);
    q = Eigen::HouseholderQR<Eigen::MatrixXd>(y).householderQ() * Eigen::MatrixXd::Identity(n, p);
    const Eigen::MatrixXd ap = q.transpose() * (a * q);
    const Eigen::MatrixXd bp = q.transpose() * (b * q);
    Eigen::EigenSolver<Eigen::MatrixXd> ritz(bp.lu().solve(ap), false);
    out = sorted_pairs(ritz.eigenvalues());
    out.iterations = iter;
    double change = 0.0;
    for (int i = 0; i < k; ++i) {
      change = std::max(change, std::abs(out.values[i] - previous[i]) / (1.0 + std::abs(out.values[i])));
    }
    out.max_residual = change;
    previous = out.values;
    if (change <= options.tolerance) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace minsphere
