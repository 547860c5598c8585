#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <iosfwd>
#include <memory>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace minsphere {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Which metric on S^2 areas and energy densities are expressed in.
///
/// UnitRound is the unit sphere in R^3 (total area 4*pi). AreaOne rescales the
/// metric so the total area is one; areas pick up the factor scale_factor and
/// squared derivatives its inverse, so the Dirichlet energy is unchanged.
enum class AreaConvention { UnitRound, AreaOne };

const char* to_string(AreaConvention convention);

/// Per-face data computed once when the mesh is built.
struct ElementGeometry {
  double flat_area = 0.0;       ///< area of the planar triangle
  double area = 0.0;            ///< area of the spherical triangle it subtends
  Eigen::Matrix3d stiffness;    ///< P1 cotangent stiffness of the planar triangle
};

/// Closed triangulation of the unit two-sphere.
///
/// Vertices lie on the unit sphere and faces are oriented outward. Linear
/// finite elements use the planar triangles for derivatives and the spherical
/// triangle areas for integration, so integrals of constants are exact.
class SphereMesh {
 public:
  SphereMesh(Eigen::MatrixX3d vertices, Eigen::MatrixX3i faces, int subdivision_level,
             AreaConvention convention = AreaConvention::UnitRound);

  const Eigen::MatrixX3d& vertices() const { return vertices_; }
  const Eigen::MatrixX3i& faces() const { return faces_; }
  Eigen::Vector3d vertex(int i) const { return vertices_.row(i).transpose(); }

  int vertex_count() const { return static_cast<int>(vertices_.rows()); }
  int face_count() const { return static_cast<int>(faces_.rows()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int subdivision_level() const { return level_; }

  AreaConvention convention() const { return convention_; }
  /// Area multiplier of the active convention: 1 or 1/(unit-round total area).
  double scale_factor() const { return scale_factor_; }

  const ElementGeometry& element(int face) const { return elements_[face]; }
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  /// Faces across the edge opposite to each corner (corner i faces vertices i+1, i+2).
  const std::vector<std::array<int, 3>>& face_neighbors() const { return neighbors_; }
  /// One face incident to each vertex.
  int vertex_face(int vertex) const { return vertex_face_[vertex]; }

  /// Total area in the active convention.
  double total_area() const;
  /// Total area of the unit-round mesh using spherical triangles (4*pi up to rounding).
  double unit_round_area() const { return unit_round_area_; }
  /// Total area of the planar triangles (unit-round).
  double flat_area() const;
  double max_edge_length() const;
  /// Lumped (row-sum) unit-round mass per vertex.
  const Eigen::VectorXd& lumped_mass() const { return lumped_mass_; }

  /// Same combinatorics and geometry, different convention metadata.
  SphereMesh with_convention(AreaConvention convention) const;

 private:
  void build_topology();
  void build_elements();

  Eigen::MatrixX3d vertices_;
  Eigen::MatrixX3i faces_;
  int level_;
  AreaConvention convention_;
  double scale_factor_ = 1.0;
  double unit_round_area_ = 0.0;
  std::vector<ElementGeometry> elements_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> neighbors_;
  std::vector<int> vertex_face_;
  Eigen::VectorXd lumped_mass_;
};

using MeshPtr = std::shared_ptr<const SphereMesh>;

/// Symmetric mass and stiffness matrices of the P1 discretisation.
struct FemPencil {
  SparseMatrix mass;
  SparseMatrix stiffness;
};

inline constexpr int kMaxSubdivisionLevel = 8;

/// Loop-style midpoint subdivision of a pole-aligned icosahedron, projected to
/// the unit sphere. Vertex 0 is the north pole and vertex 11 the south pole.
SphereMesh build_icosphere(int subdivision_level);
MeshPtr make_icosphere(int subdivision_level);

/// Assemble the consistent mass and cotangent stiffness matrices in face order.
/// Mass is scaled by the convention's area factor; stiffness is scale free.
FemPencil assemble_pencil(const SphereMesh& mesh);

/// Switch a unit-round mesh to the area-one convention.
SphereMesh to_area_one(const SphereMesh& mesh);

/// Spherical triangle area for unit vectors a, b, c.
double spherical_triangle_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                               const Eigen::Vector3d& c);

void write_obj(const SphereMesh& mesh, std::ostream& out);
nlohmann::json mesh_summary(const SphereMesh& mesh);

/// Locates points of S^2 in the triangulation by walking across faces.
class MeshLocator {
 public:
  explicit MeshLocator(MeshPtr mesh);

  struct Location {
    int face = -1;
    Eigen::Vector3d barycentric = Eigen::Vector3d::Zero();
  };

  /// The face whose cone contains direction p, with barycentric weights of the
  /// ray-triangle intersection. The search starts at `hint_face` when given.
  Location locate(const Eigen::Vector3d& p, int hint_face = -1) const;

  const SphereMesh& mesh() const { return *mesh_; }

 private:
  MeshPtr mesh_;
};

}  // namespace minsphere
