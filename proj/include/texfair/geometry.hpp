#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "texfair/image.hpp"

namespace texfair {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat23 = Eigen::Matrix<double, 2, 3>;
using Mat34 = Eigen::Matrix<double, 3, 4>;

using Face = std::array<int, 3>;

/// Shared-vertex triangle mesh.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  /// Throws InvalidMesh on out-of-range or repeated indices and on faces
  /// with area <= 1e-12.
  void validate() const;

  /// Faces containing `vertex`, in increasing face order.
  std::vector<int> incident_faces(int vertex) const;

  /// Mean length of the edges incident to `vertex`.
  double mean_incident_edge_length(int vertex) const;

  double face_area(int face) const;
};

/// A calibrated view: 3x4 projection matrix and its grayscale image.
struct CameraView {
  Mat34 P = Mat34::Zero();
  GrayImage image;

  int width() const { return image.width(); }
  int height() const { return image.height(); }
};

/// Projection of one mesh face into one view, corners in face vertex order.
struct ImagePatch {
  int view = -1;
  int face = -1;
  std::array<Vec2, 3> corners;

  double signed_area() const;

  /// True when every corner lies inside [-margin, size-1+margin].
  bool within_bounds(int width, int height, double margin) const;
};

inline constexpr double kMinDepth = 1e-12;
inline constexpr double kDegenerateArea = 1e-9;  // px^2
inline constexpr double kMinPatchArea = 1.0;     // smallest patch worth warping

/// Depth r3.x + t3 of a point.
double depth(const Mat34& P, const Vec3& x);

Vec2 project_point(const Mat34& P, const Vec3& x);

/// Exact 2x3 matrix J with delta_u = J * eta for a vertex displacement eta.
Mat23 pixel_displacement_jacobian(const Mat34& P, const Vec3& x);

ImagePatch face_image_triangle(const TriMesh& mesh, int face,
                               const CameraView& view, int view_index = 0);

}  // namespace texfair
