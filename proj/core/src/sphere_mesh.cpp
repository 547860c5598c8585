#include "minsphere/sphere_mesh.hpp"

#include "minsphere/errors.hpp"

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <utility>

namespace minsphere {

const char* to_string(AreaConvention convention) {
  return convention == AreaConvention::UnitRound ? "UnitRound" : "AreaOne";
}

double spherical_triangle_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                               const Eigen::Vector3d& c) {
  // Van Oosterom-Strackee solid angle.
  const double numerator = std::abs(a.dot(b.cross(c)));
  const double denominator = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(numerator, denominator);
}

namespace {

Eigen::Matrix3d cotangent_stiffness(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                                    const Eigen::Vector3d& p2) {
  const std::array<Eigen::Vector3d, 3> p{p0, p1, p2};
  Eigen::Matrix3d k = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int l = (i + 2) % 3;
    const Eigen::Vector3d u = p[j] - p[i];
    const Eigen::Vector3d w = p[l] - p[i];
    const double half_cot = 0.5 * u.dot(w) / u.cross(w).norm();
    k(j, l) -= half_cot;
    k(l, j) -= half_cot;
    k(j, j) += half_cot;
    k(l, l) += half_cot;
  }
  return k;
}

}  // namespace

SphereMesh::SphereMesh(Eigen::MatrixX3d vertices, Eigen::MatrixX3i faces, int subdivision_level,
                       AreaConvention convention)
    : vertices_(std::move(vertices)),
      faces_(std::move(faces)),
      level_(subdivision_level),
      convention_(convention) {
  for (int i = 0; i < vertices_.rows(); ++i) {
    if (std::abs(vertices_.row(i).norm() - 1.0) > 1e-12) {
      throw InvariantError("SphereMesh: vertex " + std::to_string(i) + " is not on the unit sphere");
    }
  }
  build_topology();
  build_elements();
  scale_factor_ = convention_ == AreaConvention::UnitRound ? 1.0 : 1.0 / unit_round_area_;
}

void SphereMesh::build_topology() {
  const int nf = face_count();
  const int nv = vertex_count();
  std::map<std::pair<int, int>, std::pair<int, int>> directed;  // (a,b) -> (face, corner)
  for (int f = 0; f < nf; ++f) {
    for (int c = 0; c < 3; ++c) {
      const int a = faces_(f, (c + 1) % 3);
      const int b = faces_(f, (c + 2) % 3);
      if (a < 0 || a >= nv || b < 0 || b >= nv) {
        throw InvariantError("SphereMesh: face " + std::to_string(f) + " has an invalid index");
      }
      if (!directed.emplace(std::make_pair(a, b), std::make_pair(f, c)).second) {
        throw InvariantError("SphereMesh: directed edge repeated at face " + std::to_string(f) +
                             " (non-manifold or inconsistent orientation)");
      }
    }
  }
  neighbors_.assign(nf, {-1, -1, -1});
  edges_.clear();
  for (const auto& [key, value] : directed) {
    const auto twin = directed.find({key.second, key.first});
    if (twin == directed.end()) {
      throw InvariantError("SphereMesh: edge (" + std::to_string(key.first) + "," +
                           std::to_string(key.second) + ") is not shared by two faces");
    }
    neighbors_[value.first][value.second] = twin->second.first;
    if (key.first < key.second) edges_.push_back({key.first, key.second});
  }
  if (nv - edge_count() + nf != 2) {
    throw InvariantError("SphereMesh: Euler characteristic is not 2");
  }
  vertex_face_.assign(nv, -1);
  for (int f = 0; f < nf; ++f) {
    for (int c = 0; c < 3; ++c) {
      if (vertex_face_[faces_(f, c)] < 0) vertex_face_[faces_(f, c)] = f;
    }
  }
  for (int v = 0; v < nv; ++v) {
    if (vertex_face_[v] < 0) throw InvariantError("SphereMesh: isolated vertex " + std::to_string(v));
  }
}

void SphereMesh::build_elements() {
  elements_.resize(face_count());
  lumped_mass_ = Eigen::VectorXd::Zero(vertex_count());
  unit_round_area_ = 0.0;
  for (int f = 0; f < face_count(); ++f) {
    const Eigen::Vector3d a = vertex(faces_(f, 0));
    const Eigen::Vector3d b = vertex(faces_(f, 1));
    const Eigen::Vector3d c = vertex(faces_(f, 2));
    const Eigen::Vector3d normal = (b - a).cross(c - a);
    ElementGeometry& e = elements_[f];
    e.flat_area = 0.5 * normal.norm();
    if (!(e.flat_area > 1e-14) || normal.dot(a + b + c) <= 0.0) {
      throw DegeneracyError("SphereMesh: face " + std::to_string(f) +
                            " is degenerate or inward oriented");
    }
    e.area = spherical_triangle_area(a, b, c);
    e.stiffness = cotangent_stiffness(a, b, c);
    unit_round_area_ += e.area;
    for (int i = 0; i < 3; ++i) lumped_mass_[faces_(f, i)] += e.area / 3.0;
  }
}

double SphereMesh::total_area() const { return unit_round_area_ * scale_factor_; }

double SphereMesh::flat_area() const {
  double total = 0.0;
  for (const auto& e : elements_) total += e.flat_area;
  return total;
}

double SphereMesh::max_edge_length() const {
  double longest = 0.0;
  for (const auto& [a, b] : edges_) {
    longest = std::max(longest, (vertices_.row(a) - vertices_.row(b)).norm());
  }
  return longest;
}

SphereMesh SphereMesh::with_convention(AreaConvention convention) const {
  SphereMesh copy = *this;
  copy.convention_ = convention;
  copy.scale_factor_ = convention == AreaConvention::UnitRound ? 1.0 : 1.0 / unit_round_area_;
  return copy;
}

SphereMesh build_icosphere(int subdivision_level) {
  if (subdivision_level < 0) throw PreconditionError("build_icosphere: negative subdivision level");
  if (subdivision_level > kMaxSubdivisionLevel) {
    throw ResourceError("build_icosphere: subdivision level " + std::to_string(subdivision_level) +
                        " exceeds the guard of " + std::to_string(kMaxSubdivisionLevel));
  }
  std::vector<Eigen::Vector3d> verts;
  verts.emplace_back(0.0, 0.0, 1.0);
  const double z = 1.0 / std::sqrt(5.0);
  const double r = 2.0 / std::sqrt(5.0);
  constexpr double kPi = std::numbers::pi;
  for (int k = 0; k < 5; ++k) {
    verts.emplace_back(r * std::cos(2 * kPi * k / 5), r * std::sin(2 * kPi * k / 5), z);
  }
  for (int k = 0; k < 5; ++k) {
    verts.emplace_back(r * std::cos(2 * kPi * (k + 0.5) / 5), r * std::sin(2 * kPi * (k + 0.5) / 5), -z);
  }
  verts.emplace_back(0.0, 0.0, -1.0);
  for (auto& v : verts) v.normalize();

  std::vector<std::array<int, 3>> faces;
  for (int k = 0; k < 5; ++k) {
    const int a = 1 + k, b = 1 + (k + 1) % 5, c = 6 + k, d = 6 + (k + 1) % 5;
    faces.push_back({0, a, b});
    faces.push_back({a, c, b});
    faces.push_back({b, c, d});
    faces.push_back({c, 11, d});
  }

  for (int level = 0; level < subdivision_level; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int i, int j) {
      const auto key = std::minmax(i, j);
      const auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      verts.push_back((verts[i] + verts[j]).normalized());
      const int id = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> refined;
    refined.reserve(4 * faces.size());
    for (const auto& [a, b, c] : faces) {
      const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
      refined.push_back({a, ab, ca});
      refined.push_back({b, bc, ab});
      refined.push_back({c, ca, bc});
      refined.push_back({ab, bc, ca});
    }
    faces = std::move(refined);
  }

  Eigen::MatrixX3d vertex_matrix(verts.size(), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) vertex_matrix.row(i) = verts[i].transpose();
  Eigen::MatrixX3i face_matrix(faces.size(), 3);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    auto [a, b, c] = faces[f];
    const Eigen::Vector3d n = (verts[b] - verts[a]).cross(verts[c] - verts[a]);
    if (n.dot(verts[a]) < 0) std::swap(b, c);
    face_matrix.row(f) << a, b, c;
  }
  return SphereMesh(std::move(vertex_matrix), std::move(face_matrix), subdivision_level);
}

MeshPtr make_icosphere(int subdivision_level) {
  return std::make_shared<const SphereMesh>(build_icosphere(subdivision_level));
}

FemPencil assemble_pencil(const SphereMesh& mesh) {
  std::vector<Eigen::Triplet<double>> mass;
  std::vector<Eigen::Triplet<double>> stiffness;
  mass.reserve(9 * mesh.face_count());
  stiffness.reserve(9 * mesh.face_count());
  const double scale = mesh.scale_factor();
  for (int f = 0; f < mesh.face_count(); ++f) {
    const ElementGeometry& e = mesh.element(f);
    if (!(e.flat_area > 0.0) || !e.stiffness.allFinite()) {
      throw DegeneracyError("assemble_pencil: degenerate face " + std::to_string(f));
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const int a = mesh.faces()(f, i);
        const int b = mesh.faces()(f, j);
        mass.emplace_back(a, b, scale * e.area / 12.0 * (i == j ? 2.0 : 1.0));
        stiffness.emplace_back(a, b, e.stiffness(i, j));
      }
    }
  }
  FemPencil pencil;
  pencil.mass.resize(mesh.vertex_count(), mesh.vertex_count());
  pencil.stiffness.resize(mesh.vertex_count(), mesh.vertex_count());
  pencil.mass.setFromTriplets(mass.begin(), mass.end());
  pencil.stiffness.setFromTriplets(stiffness.begin(), stiffness.end());
  return pencil;
}

SphereMesh to_area_one(const SphereMesh& mesh) {
  if (mesh.convention() != AreaConvention::UnitRound) {
    throw PreconditionError("to_area_one: mesh is already in the area-one convention");
  }
  return mesh.with_convention(AreaConvention::AreaOne);
}

void write_obj(const SphereMesh& mesh, std::ostream& out) {
  out.precision(17);
  out << "# icosphere level " << mesh.subdivision_level() << "\n";
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    out << "v " << mesh.vertices()(i, 0) << ' ' << mesh.vertices()(i, 1) << ' '
        << mesh.vertices()(i, 2) << '\n';
  }
  for (int f = 0; f < mesh.face_count(); ++f) {
    out << "f " << mesh.faces()(f, 0) + 1 << ' ' << mesh.faces()(f, 1) + 1 << ' '
        << mesh.faces()(f, 2) + 1 << '\n';
  }
}

nlohmann::json mesh_summary(const SphereMesh& mesh) {
  return {{"level", mesh.subdivision_level()},
          {"convention", to_string(mesh.convention())},
          {"vertex_count", mesh.vertex_count()},
          {"face_count", mesh.face_count()}};
}

}  // namespace minsphere
