#include "minsphere/errors.hpp"
#include "minsphere/sphere_mesh.hpp"

#include <Eigen/Geometry>

#include <limits>

namespace minsphere {

MeshLocator::MeshLocator(MeshPtr mesh) : mesh_(std::move(mesh)) {
  if (!mesh_) throw PreconditionError("MeshLocator: null mesh");
}

namespace {

// Signed edge tests of direction p against the cone over face f.
Eigen::Vector3d edge_tests(const SphereMesh& mesh, int f, const Eigen::Vector3d& p) {
  Eigen::Vector3d s;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d u = mesh.vertex(mesh.faces()(f, (i + 1) % 3));
    const Eigen::Vector3d w = mesh.vertex(mesh.faces()(f, (i + 2) % 3));
    s[i] = u.cross(w).dot(p);
  }
  return s;
}

}  // namespace

MeshLocator::Location MeshLocator::locate(const Eigen::Vector3d& p, int hint_face) const {
  const SphereMesh& mesh = *mesh_;
  int face = (hint_face >= 0 && hint_face < mesh.face_count()) ? hint_face : 0;
  for (int step = 0; step <= mesh.face_count(); ++step) {
    const Eigen::Vector3d s = edge_tests(mesh, face, p);
    int worst = 0;
    s.minCoeff(&worst);
    if (s[worst] >= -1e-15) {
      Location loc;
      loc.face = face;
      loc.barycentric = s.cwiseMax(0.0) / s.cwiseMax(0.0).sum();
      return loc;
    }
    face = mesh.face_neighbors()[face][worst];
  }
  // Walks only fail on pathological input; fall back to a scan.
  Location best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Eigen::Vector3d s = edge_tests(mesh, f, p);
    if (s.minCoeff() > best_score) {
      best_score = s.minCoeff();
      best.face = f;
      best.barycentric = s.cwiseMax(0.0) / s.cwiseMax(0.0).sum();
    }
  }
  return best;
}

}  // namespace minsphere
