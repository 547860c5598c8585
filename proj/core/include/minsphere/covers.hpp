#pragma once

#include "minsphere/energy.hpp"
#include "minsphere/sphere_mesh.hpp"

#include <Eigen/Core>

#include <complex>
#include <functional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace minsphere {

using Complex = std::complex<double>;

/// Point of the Riemann sphere C u {infinity}.
struct ExtComplex {
  Complex value{0.0, 0.0};
  bool infinite = false;

  static ExtComplex infinity() { return {Complex{}, true}; }
  ExtComplex() = default;
  ExtComplex(Complex z) : value(z) {}  // NOLINT(google-explicit-constructor)
  ExtComplex(double x) : value(x, 0.0) {}  // NOLINT(google-explicit-constructor)
  ExtComplex(Complex z, bool inf) : value(z), infinite(inf) {}
};

/// Inverse stereographic projection from the north pole: z = (x + i y) / (1 - x3).
Eigen::Vector3d to_sphere(const ExtComplex& z);
ExtComplex from_sphere(const Eigen::Vector3d& p);
/// Euclidean distance of the images on the unit sphere.
double chordal_distance(const ExtComplex& a, const ExtComplex& b);

/// z -> (a z + b) / (c z + d).
class Mobius {
 public:
  Mobius() : m_(Eigen::Matrix2cd::Identity()) {}
  explicit Mobius(const Eigen::Matrix2cd& m);

  /// The transformation sending z1, z2, z3 to 0, infinity, 1.
  static Mobius to_standard(const ExtComplex& z1, const ExtComplex& z2, const ExtComplex& z3);
  /// The transformation sending (z1, z2, z3) to (w1, w2, w3).
  static Mobius from_points(const ExtComplex& z1, const ExtComplex& z2, const ExtComplex& z3,
                            const ExtComplex& w1, const ExtComplex& w2, const ExtComplex& w3);

  ExtComplex operator()(const ExtComplex& z) const;
  Mobius inverse() const;
  Mobius operator*(const Mobius& other) const { return Mobius(m_ * other.m_); }
  const Eigen::Matrix2cd& matrix() const { return m_; }

 private:
  Eigen::Matrix2cd m_;
};

/// g(z) = c (z - p_1)...(z - p_d) / ((z - q_1)...(z - q_d)); entries equal to
/// infinity drop out of the products.
class RationalMap {
 public:
  RationalMap(std::vector<ExtComplex> zeros, std::vector<ExtComplex> poles, Complex scale);

  static RationalMap identity();
  /// z^d.
  static RationalMap power(int d);
  /// Random map of degree d with finite zeros and poles, seeded.
  static RationalMap random(int d, std::uint64_t seed);

  int degree() const { return static_cast<int>(zeros_.size()); }
  const std::vector<ExtComplex>& zeros() const { return zeros_; }
  const std::vector<ExtComplex>& poles() const { return poles_; }
  Complex scale() const { return scale_; }

  ExtComplex operator()(const ExtComplex& z) const { return evaluate(z); }
  ExtComplex evaluate(const ExtComplex& z) const;

  /// Monic numerator and denominator built from the finite zeros and poles,
  /// coefficients in increasing degree.
  Eigen::VectorXcd numerator() const;
  Eigen::VectorXcd denominator() const;

 private:
  std::vector<ExtComplex> zeros_;
  std::vector<ExtComplex> poles_;
  Complex scale_;
};

ExtComplex evaluate(const RationalMap& g, const ExtComplex& z);

struct HolDimensions {
  int complex_dim = 0;           ///< 2d + 1
  int real_dim_orbit_family = 0; ///< 4d + 2
};

HolDimensions hol_space_dimension(int d);

struct BranchPoint {
  ExtComplex point;
  int multiplicity = 1;
};

/// Zeros of g' with multiplicity, including infinity; total 2d - 2.
std::vector<BranchPoint> branch_points(const RationalMap& g);

/// Embedding S^2 -> S^n used as the outer map of a cover.
using SphereEmbedding = std::function<Eigen::VectorXd(const Eigen::Vector3d&)>;

/// Totally geodesic inclusion into the first three coordinates of R^(n+1).
SphereEmbedding equator_embedding(int n);

struct ComposeOptions {
  /// Rotate the domain so the first finite branch point sits on a mesh vertex.
  bool snap_branch_point = true;
};

/// Samples h(g(v)) at the mesh vertices through stereographic charts.
SphereMap compose_cover(MeshPtr mesh, const SphereEmbedding& h, int n, const RationalMap& g,
                        const ComposeOptions& options = {});

struct DoubleCoverNormalization {
  Mobius s;
  Mobius t;
  double residual = 0.0;  ///< max chordal |g(z) - S^-1(T(z)^2)| over the samples
};

/// g = S^-1 o (z -> z^2) o T for a degree-two g; T sends the branch points to 0 and infinity.
DoubleCoverNormalization normalize_double_cover(const RationalMap& g);

struct InducedSpectrum {
  Eigen::VectorXd eigenvalues;
  double lambda1 = 0.0;
  double area = 0.0;  ///< area of the pulled-back metric
  int floored_elements = 0;
  double floored_fraction = 0.0;
  bool degeneracy_warning = false;  ///< more than 1% of elements floored
};

/// Low spectrum of the Laplacian of the metric pulled back by f. Elements whose
/// conformal factor falls below eps_reg times the mean use the floored factor.
InducedSpectrum induced_metric_spectrum(const SphereMap& f, double eps_reg, int k = 10);
double induced_metric_lambda1(const SphereMap& f, double eps_reg);

/// (number of pulled-back eigenvalues below 2 - margin) * (n - 2).
int double_cover_normal_index(const SphereMap& f, int n, double eps_reg = 1e-3, double margin = 0.05);

nlohmann::json to_json(const RationalMap& g);
RationalMap rational_map_from_json(const nlohmann::json& j);

}  // namespace minsphere
