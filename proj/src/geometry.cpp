#include "texfair/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "texfair/error.hpp"

namespace texfair {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DepthNonPositive: return "DepthNonPositive";
    case ErrorCode::DegenerateProjection: return "DegenerateProjection";
    case ErrorCode::InsufficientViews: return "InsufficientViews";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::MaskMismatch: return "MaskMismatch";
    case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorCode::EmptyResiduals: return "EmptyResiduals";
    case ErrorCode::NoObservations: return "NoObservations";
    case ErrorCode::InvalidMesh: return "InvalidMesh";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

void TriMesh::validate() const {
  const int n = static_cast<int>(vertices.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& face = faces[f];
    for (int idx : face) {
      if (idx < 0 || idx >= n) {
        throw Error(ErrorCode::InvalidMesh,
                    "face " + std::to_string(f) + " references vertex " +
                        std::to_string(idx) + " of " + std::to_string(n));
      }
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      throw Error(ErrorCode::InvalidMesh,
                  "face " + std::to_string(f) + " repeats a vertex");
    }
    if (face_area(static_cast<int>(f)) <= 1e-12) {
      throw Error(ErrorCode::InvalidMesh,
                  "face " + std::to_string(f) + " has zero area");
    }
  }
}

std::vector<int> TriMesh::incident_faces(int vertex) const {
  std::vector<int> out;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (std::find(faces[f].begin(), faces[f].end(), vertex) != faces[f].end()) {
      out.push_back(static_cast<int>(f));
    }
  }
  return out;
}

double TriMesh::mean_incident_edge_length(int vertex) const {
  // Each neighbour is counted once even when it is shared by two faces.
  std::vector<int> neighbours;
  for (const Face& face : faces) {
    if (std::find(face.begin(), face.end(), vertex) == face.end()) continue;
    for (int idx : face) {
      if (idx != vertex &&
          std::find(neighbours.begin(), neighbours.end(), idx) == neighbours.end()) {
        neighbours.push_back(idx);
      }
    }
  }
  if (neighbours.empty()) return 0.0;
  double total = 0.0;
  for (int idx : neighbours) total += (vertices[idx] - vertices[vertex]).norm();
  return total / static_cast<double>(neighbours.size());
}

double TriMesh::face_area(int face) const {
  const Face& f = faces[face];
  const Vec3 e1 = vertices[f[1]] - vertices[f[0]];
  const Vec3 e2 = vertices[f[2]] - vertices[f[0]];
  return 0.5 * e1.cross(e2).norm();
}

double ImagePatch::signed_area() const {
  const Vec2 e1 = corners[1] - corners[0];
  const Vec2 e2 = corners[2] - corners[0];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

bool ImagePatch::within_bounds(int width, int height, double margin) const {
  return std::all_of(corners.begin(), corners.end(), [&](const Vec2& u) {
    return u.x() >= -margin && u.y() >= -margin &&
           u.x() <= width - 1.0 + margin && u.y() <= height - 1.0 + margin;
  });
}

double depth(const Mat34& P, const Vec3& x) {
  return P.row(2).head<3>().dot(x) + P(2, 3);
}

Vec2 project_point(const Mat34& P, const Vec3& x) {
  const double w = depth(P, x);
  if (w <= kMinDepth) {
    throw Error(ErrorCode::DepthNonPositive, "point is behind the camera");
  }
  const double u = P.row(0).head<3>().dot(x) + P(0, 3);
  const double v = P.row(1).head<3>().dot(x) + P(1, 3);
  return {u / w, v / w};
}

Mat23 pixel_displacement_jacobian(const Mat34& P, const Vec3& x) {
  const double w = depth(P, x);
  if (w <= kMinDepth) {
    throw Error(ErrorCode::DepthNonPositive, "point is behind the camera");
  }
  const Eigen::RowVector3d r3 = P.row(2).head<3>();
  Mat23 J;
  for (int p = 0; p < 2; ++p) {
    const Eigen::RowVector3d rp = P.row(p).head<3>();
    const double num = rp.dot(x) + P(p, 3);
    J.row(p) = (w * rp - num * r3) / (w * w);
  }
  return J;
}

ImagePatch face_image_triangle(const TriMesh& mesh, int face,
                               const CameraView& view, int view_index) {
  ImagePatch patch;
  patch.view = view_index;
  patch.face = face;
  for (int j = 0; j < 3; ++j) {
    patch.corners[j] = project_point(view.P, mesh.vertices[mesh.faces[face][j]]);
  }
  if (std::abs(patch.signed_area()) <= kDegenerateArea) {
    throw Error(ErrorCode::DegenerateProjection,
                "face " + std::to_string(face) + " projects to a degenerate triangle in view " +
                    std::to_string(view_index));
  }
  return patch;
}

}  // namespace texfair
