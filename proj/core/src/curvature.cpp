#include "minsphere/curvature.hpp"

#include "minsphere/errors.hpp"

#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace minsphere {

using cplx = std::complex<double>;

CurvatureOperator::CurvatureOperator(int n) : n_(n) {
  if (n < 2) throw PreconditionError("CurvatureOperator: dimension must be at least 2");
  r_.assign(static_cast<std::size_t>(n) * n * n * n, 0.0);
}

CurvatureOperator CurvatureOperator::constant(int n, double curvature) {
  CurvatureOperator r(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      r(i, j, i, j) = curvature;
      r(i, j, j, i) = -curvature;
    }
  }
  return r;
}

CurvatureOperator CurvatureOperator::product_of_spheres(int n, int p) {
  if (p < 1 || p >= n) throw PreconditionError("product_of_spheres: need 1 <= p < n");
  CurvatureOperator r(n);
  auto block = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      for (int j = lo; j < hi; ++j) {
        if (i == j) continue;
        r(i, j, i, j) = 1.0;
        r(i, j, j, i) = -1.0;
      }
    }
  };
  block(0, p);
  block(p, n);
  return r;
}

CurvatureOperator CurvatureOperator::kulkarni_nomizu(const Eigen::MatrixXd& h) {
  const int n = static_cast<int>(h.rows());
  if (h.cols() != n) throw PreconditionError("kulkarni_nomizu: h must be square");
  CurvatureOperator r(n);
  auto g = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          r(i, j, k, l) = h(i, k) * g(j, l) + h(j, l) * g(i, k) - h(i, l) * g(j, k) -
                          h(j, k) * g(i, l);
  return r;
}

CurvatureOperator& CurvatureOperator::operator+=(const CurvatureOperator& other) {
  if (other.n_ != n_) throw PreconditionError("CurvatureOperator: dimension mismatch");
  for (std::size_t i = 0; i < r_.size(); ++i) r_[i] += other.r_[i];
  return *this;
}

CurvatureOperator& CurvatureOperator::operator*=(double s) {
  for (double& v : r_) v *= s;
  return *this;
}

double CurvatureOperator::symmetry_defect() const {
  const auto& r = *this;
  double worst = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) {
          const double v = r(i, j, k, l);
          worst = std::max({worst, std::abs(v + r(j, i, k, l)), std::abs(v + r(i, j, l, k)),
                            std::abs(v - r(k, l, i, j)),
                            std::abs(v + r(i, k, l, j) + r(i, l, j, k))});
        }
  return worst;
}

CurvatureOperator CurvatureOperator::projected() const {
  const auto& t = *this;
  CurvatureOperator a(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) {
          const double anti = 0.25 * (t(i, j, k, l) - t(j, i, k, l) - t(i, j, l, k) + t(j, i, l, k));
          const double anti_swapped =
              0.25 * (t(k, l, i, j) - t(l, k, i, j) - t(k, l, j, i) + t(l, k, j, i));
          a(i, j, k, l) = 0.5 * (anti + anti_swapped);
        }
  // With pair symmetries in place the Bianchi part is totally antisymmetric;
  // removing it keeps the other symmetries.
  CurvatureOperator out(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) {
          const double bianchi = (a(i, j, k, l) + a(j, k, i, l) + a(k, i, j, l)) / 3.0;
          out(i, j, k, l) = a(i, j, k, l) - bianchi;
        }
  return out;
}

double CurvatureOperator::contract(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& z, const Eigen::VectorXd& w) const {
  double total = 0.0;
  for (int i = 0; i < n_; ++i) {
    if (x[i] == 0.0) continue;
    for (int j = 0; j < n_; ++j) {
      if (y[j] == 0.0) continue;
      double inner = 0.0;
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) inner += r_[index(i, j, k, l)] * z[k] * w[l];
      total += x[i] * y[j] * inner;
    }
  }
  return total;
}

double CurvatureOperator::sectional(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  const double denom = x.squaredNorm() * y.squaredNorm() - std::pow(x.dot(y), 2);
  if (!(denom > 1e-12)) throw PreconditionError("sectional: vectors are linearly dependent");
  return contract(x, y, x, y) / denom;
}

Eigen::MatrixXd CurvatureOperator::bivector_matrix() const {
  const int m = n_ * (n_ - 1) / 2;
  Eigen::MatrixXd b(m, m);
  int p = 0;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j, ++p) {
      int q = 0;
      for (int k = 0; k < n_; ++k)
        for (int l = k + 1; l < n_; ++l, ++q) b(p, q) = r_[index(i, j, k, l)];
    }
  return b;
}

namespace {

cplx bilinear(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  return (a.array() * b.array()).sum();
}

Eigen::VectorXcd wedge(const Eigen::VectorXcd& z, const Eigen::VectorXcd& w) {
  const int n = static_cast<int>(z.size());
  Eigen::VectorXcd b(n * (n - 1) / 2);
  int p = 0;
  for (int k = 0; k < n; ++k)
    for (int l = k + 1; l < n; ++l) b[p++] = z[k] * w[l] - z[l] * w[k];
  return b;
}

double hermitian_gram_det(const Eigen::VectorXcd& z, const Eigen::VectorXcd& w) {
  return z.squaredNorm() * w.squaredNorm() - std::norm(z.dot(w));
}

}  // namespace

ComplexPlane make_plane(Eigen::VectorXcd z, Eigen::VectorXcd w) {
  if (z.size() != w.size()) throw PreconditionError("make_plane: dimension mismatch");
  if (!(hermitian_gram_det(z, w) > 1e-12)) {
    throw PreconditionError("make_plane: vectors are not complex-linearly independent");
  }
  return {std::move(z), std::move(w)};
}

double complex_sectional_curvature(const CurvatureOperator& r, const ComplexPlane& plane) {
  if (plane.z.size() != r.dim() || plane.w.size() != r.dim()) {
    throw PreconditionError("complex_sectional_curvature: dimension mismatch");
  }
  const Eigen::VectorXcd b = wedge(plane.z, plane.w);
  const double denom = b.squaredNorm();
  if (!(denom > 1e-12)) {
    throw PreconditionError("complex_sectional_curvature: degenerate plane");
  }
  // <R(b), conj(b)> with R symmetric on bivectors is real.
  const cplx numer = b.transpose() * (r.bivector_matrix() * b.conjugate());
  return numer.real() / denom;
}

bool is_half_isotropic(const ComplexPlane& plane, double tol) {
  return std::abs(bilinear(plane.z, plane.z)) <= tol && std::abs(bilinear(plane.z, plane.w)) <= tol;
}

bool is_isotropic(const ComplexPlane& plane, double tol) {
  return is_half_isotropic(plane, tol) && std::abs(bilinear(plane.w, plane.w)) <= tol;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> associated_real_plane(const Eigen::VectorXcd& v,
                                                                  double tol) {
  if (!(v.norm() > tol)) throw PreconditionError("associated_real_plane: zero vector");
  if (std::abs(bilinear(v, v)) > tol) {
    throw PreconditionError("associated_real_plane: vector is not isotropic");
  }
  return {v.real(), v.imag()};
}

PinchBounds pinch_bounds(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw PreconditionError("pinch_bounds: delta must be in (0, 1]");
  return {(4.0 * delta - 1.0) / 3.0, (4.0 - delta) / 3.0};
}

Eigen::MatrixXd random_orthonormal_frame(int n, int k, std::mt19937_64& rng) {
  if (k > n) throw PreconditionError("random_orthonormal_frame: k exceeds n");
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(n, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
  // Fix column signs so the distribution is Haar.
  const Eigen::MatrixXd rr = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j) {
    if (rr(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

namespace {

struct PretestResult {
  bool ok = true;
  std::string note;
  double min_kr = std::numeric_limits<double>::infinity();
  double max_kr = -std::numeric_limits<double>::infinity();
  double max_mixed = 0.0;
};

constexpr double kRoundoff = 1e-12;

PretestResult pretest_pinching(const CurvatureOperator& r, double delta, long samples,
                               std::mt19937_64& rng) {
  PretestResult out;
  for (long s = 0; s < samples; ++s) {
    const Eigen::MatrixXd e = random_orthonormal_frame(r.dim(), 4, rng);
    const double kr = r.contract(e.col(0), e.col(1), e.col(0), e.col(1));
    out.min_kr = std::min(out.min_kr, kr);
    out.max_kr = std::max(out.max_kr, kr);
    out.max_mixed = std::max(out.max_mixed, std::abs(r.contract(e.col(0), e.col(1), e.col(3), e.col(2))));
  }
  if (!(out.min_kr > delta) || out.max_kr > 1.0 + kRoundoff) {
    out.ok = false;
    out.note = "sampled real sectional curvatures leave (delta, 1]";
  } else if (out.max_mixed > 2.0 / 3.0 * (1.0 - delta) + kRoundoff) {
    out.ok = false;
    out.note = "mixed curvature term exceeds 2(1 - delta)/3";
  }
  return out;
}

}  // namespace

PinchReport verify_pinch_implication(const CurvatureOperator& r, double delta, long sample_count,
                                     std::uint64_t seed) {
  if (r.dim() < 4) throw PreconditionError("verify_pinch_implication: need n >= 4");
  if (sample_count < 1) throw PreconditionError("verify_pinch_implication: need samples");
  const PinchBounds bounds = pinch_bounds(delta);

  PinchReport report;
  report.delta = delta;
  report.samples = sample_count;
  report.seed = seed;

  std::mt19937_64 rng(seed);
  const PretestResult pre = pretest_pinching(r, delta, sample_count, rng);
  report.min_real_curvature = pre.min_kr;
  report.max_real_curvature = pre.max_kr;
  report.max_mixed_term = pre.max_mixed;
  report.hypothesis_satisfied = pre.ok;
  if (!pre.ok) {
    report.hypothesis_note = "hypothesis not satisfied: " + pre.note;
    report.worst_margin = std::numeric_limits<double>::quiet_NaN();
    return report;
  }

  std::uniform_real_distribution<double> log_scale(-std::log(10.0), std::log(10.0));
  const cplx i(0.0, 1.0);
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (long s = 0; s < sample_count; ++s) {
    const Eigen::MatrixXd e = random_orthonormal_frame(r.dim(), 4, rng);
    const double a = std::exp(log_scale(rng));
    const double b = std::exp(log_scale(rng));
    const Eigen::VectorXcd z = e.col(0).cast<cplx>() + i * e.col(1).cast<cplx>();
    const Eigen::VectorXcd w = a * e.col(2).cast<cplx>() + i * b * e.col(3).cast<cplx>();
    const double ki = complex_sectional_curvature(r, {z, w});
    const double margin = std::min(ki - bounds.lower, bounds.upper - ki);
    report.worst_margin = std::min(report.worst_margin, margin);
    if (!(ki > bounds.lower) || ki > bounds.upper + kRoundoff) ++report.violations;
  }
  return report;
}

nlohmann::json to_json(const PinchReport& report) {
  nlohmann::json j = {{"delta", report.delta},
                      {"samples", report.samples},
                      {"seed", report.seed},
                      {"violations", report.violations},
                      {"hypothesis_satisfied", report.hypothesis_satisfied},
                      {"min_real_curvature", report.min_real_curvature},
                      {"max_real_curvature", report.max_real_curvature},
                      {"max_mixed_term", report.max_mixed_term}};
  j["worst_margin"] = std::isfinite(report.worst_margin) ? nlohmann::json(report.worst_margin)
                                                         : nlohmann::json(nullptr);
  if (!report.hypothesis_note.empty()) j["note"] = report.hypothesis_note;
  return j;
}

bool curvature_condition_d(const CurvatureOperator& r, int d, long sample_count,
                           std::uint64_t seed) {
  if (r.dim() < 4) throw PreconditionError("curvature_condition_d: need n >= 4");
  if (d < 1) throw PreconditionError("curvature_condition_d: d must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const cplx i(0.0, 1.0);
  for (long s = 0; s < sample_count; ++s) {
    const Eigen::MatrixXd e = random_orthonormal_frame(r.dim(), 4, rng);
    const Eigen::VectorXcd z = e.col(0).cast<cplx>() + i * e.col(1).cast<cplx>();
    const Eigen::VectorXcd w = e.col(2).cast<cplx>() + i * e.col(3).cast<cplx>();
    const double ki = complex_sectional_curvature(r, {z, w});
    // Every nonzero element of an isotropic plane is isotropic.
    const cplx c0(normal(rng), normal(rng));
    const cplx c1(normal(rng), normal(rng));
    const auto [x, y] = associated_real_plane(c0 * z + c1 * w, 1e-8);
    const double kr = r.sectional(x, y);
    if (!(kr > 0.0) || !(ki > kr / d)) return false;
  }
  return true;
}

CurvatureOperator random_pinched_operator(int n, double delta, std::uint64_t seed) {
  if (n < 2) throw PreconditionError("random_pinched_operator: n must be at least 2");
  if (!(delta > 0.0 && delta < 0.8)) {
    throw PreconditionError("random_pinched_operator: delta must be in (0, 0.8)");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  const double lo = delta + 0.1;
  const double hi = 0.95;
  for (int attempt = 0; attempt < 50; ++attempt) {
    const double lambda = unit(rng);
    const double c1 = lo + (hi - lo) * unit(rng);
    const double c2 = lo + (hi - lo) * unit(rng);
    CurvatureOperator r = lambda * CurvatureOperator::constant(n, c1) +
                          (1.0 - lambda) * CurvatureOperator::constant(n, c2);

    Eigen::MatrixXd h(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) h(a, b) = normal(rng);
    h = 0.5 * (h + h.transpose()).eval();
    h *= 0.015 / h.norm();
    r += CurvatureOperator::kulkarni_nomizu(h);

    CurvatureOperator noise(n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int e = 0; e < n; ++e) noise(a, b, c, e) = normal(rng);
    noise = noise.projected();
    noise *= 0.01 / std::sqrt(static_cast<double>(n * n * n * n));
    r += noise;

    const long checks = n >= 4 ? 2000 : 0;
    if (checks == 0) return r;
    std::mt19937_64 check_rng(seed ^ (0x9e3779b97f4a7c15ULL * (attempt + 1)));
    if (pretest_pinching(r, delta, checks, check_rng).ok) return r;
  }
  throw NumericError("random_pinched_operator: no admissible candidate after 50 draws");
}

}  // namespace minsphere
