#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace minsphere {

/// Components R_{ijkl} of a curvature tensor at a point, in an orthonormal frame.
///
/// Sign convention: the sectional curvature of the plane spanned by orthonormal
/// e_i, e_j is R_{ijij}, so the unit sphere has R_{ijkl} = d_ik d_jl - d_il d_jk.
class CurvatureOperator {
 public:
  explicit CurvatureOperator(int n);

  static CurvatureOperator constant(int n, double curvature);
  /// Riemannian product S^p(1) x S^{n-p}(1) in an adapted frame.
  static CurvatureOperator product_of_spheres(int n, int p);
  /// Kulkarni-Nomizu product h (.) g with the flat metric g = identity.
  static CurvatureOperator kulkarni_nomizu(const Eigen::MatrixXd& h);

  int dim() const { return n_; }
  double operator()(int i, int j, int k, int l) const { return r_[index(i, j, k, l)]; }
  double& operator()(int i, int j, int k, int l) { return r_[index(i, j, k, l)]; }

  CurvatureOperator& operator+=(const CurvatureOperator& other);
  CurvatureOperator& operator*=(double s);
  friend CurvatureOperator operator+(CurvatureOperator a, const CurvatureOperator& b) { return a += b; }
  friend CurvatureOperator operator*(double s, CurvatureOperator a) { return a *= s; }

  /// Largest violation of the antisymmetries, pair symmetry and first Bianchi identity.
  double symmetry_defect() const;
  /// Orthogonal projection of an arbitrary 4-tensor onto the curvature symmetry class.
  CurvatureOperator projected() const;

  /// R(x, y, z, w) = sum R_{ijkl} x^i y^j z^k w^l.
  double contract(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                  const Eigen::VectorXd& w) const;
  /// Classical sectional curvature of span{x, y}.
  double sectional(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  /// Matrix of the operator on bivectors e_i ^ e_j (i < j), entries R_{ijkl}.
  Eigen::MatrixXd bivector_matrix() const;

 private:
  std::size_t index(int i, int j, int k, int l) const {
    return ((static_cast<std::size_t>(i) * n_ + j) * n_ + k) * n_ + l;
  }
  int n_;
  std::vector<double> r_;
};

/// Complex two-plane spanned by z, w in T_pM (x) C.
struct ComplexPlane {
  Eigen::VectorXcd z;
  Eigen::VectorXcd w;
};

/// Builds a plane after checking that z and w are complex-linearly independent.
ComplexPlane make_plane(Eigen::VectorXcd z, Eigen::VectorXcd w);

/// Hermitian curvature quotient <R(z^w), conj(z)^conj(w)> / <z^w, conj(z)^conj(w)>.
double complex_sectional_curvature(const CurvatureOperator& r, const ComplexPlane& plane);

inline constexpr double kIsotropyTolerance = 1e-9;

/// Complex-bilinear (not Hermitian) products <z,z>, <z,w>, <w,w> all vanish.
bool is_isotropic(const ComplexPlane& plane, double tol = kIsotropyTolerance);
/// <z,z> = <z,w> = 0.
bool is_half_isotropic(const ComplexPlane& plane, double tol = kIsotropyTolerance);

/// Splits an isotropic vector v = x + i y into its orthogonal, equal-length parts.
std::pair<Eigen::VectorXd, Eigen::VectorXd> associated_real_plane(const Eigen::VectorXcd& v,
                                                                  double tol = kIsotropyTolerance);

struct PinchBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Range of half-isotropic curvatures implied by delta < K_r <= 1:
/// ((4 delta - 1) / 3, (4 - delta) / 3).
PinchBounds pinch_bounds(double delta);

struct PinchReport {
  double delta = 0.0;
  long samples = 0;
  std::uint64_t seed = 0;
  bool hypothesis_satisfied = false;
  std::string hypothesis_note;
  long violations = 0;
  double worst_margin = 0.0;
  double min_real_curvature = 0.0;
  double max_real_curvature = 0.0;
  double max_mixed_term = 0.0;  ///< largest |R_{1243}| over sampled orthonormal 4-frames
};

/// Samples half-isotropic planes span{e1 + i e2, a e3 + i b e4} over random
/// orthonormal 4-frames (log-uniform a, b) and counts curvatures outside
/// pinch_bounds(delta). The pinching and mixed-term hypotheses are pretested
/// on the same number of random real planes and frames.
PinchReport verify_pinch_implication(const CurvatureOperator& r, double delta, long sample_count,
                                     std::uint64_t seed);

nlohmann::json to_json(const PinchReport& report);

/// True iff K_i(sigma) > K_r(sigma_hat) / d > 0 on every sampled isotropic plane,
/// sigma_hat being the real plane associated to a random element of sigma.
bool curvature_condition_d(const CurvatureOperator& r, int d, long sample_count,
                           std::uint64_t seed);

/// Orthonormal n x k frame drawn from the Haar measure.
Eigen::MatrixXd random_orthonormal_frame(int n, int k, std::mt19937_64& rng);

/// A curvature operator whose sampled real sectional curvatures lie in
/// (delta, 1]: a mix of two space forms, a small Kulkarni-Nomizu term and
/// projected noise. Candidates are redrawn until the pretests pass.
CurvatureOperator random_pinched_operator(int n, double delta, std::uint64_t seed);

}  // namespace minsphere
