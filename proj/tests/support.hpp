#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "texfair/synth.hpp"
#include "texfair/warp.hpp"

namespace texfair::testing {

/// Default scene, built once per process.
inline const SyntheticScene& cube() {
  static const SyntheticScene scene = make_cube_scene();
  return scene;
}

/// Scene where perspective is negligible across a face and no view is
/// grazing: the regime in which two warped views of a plane should agree.
inline SynthOptions near_affine_options(double distance = 30.0, double ring = 20.0) {
  SynthOptions o;
  o.distance = distance;
  o.ring_degrees = ring;
  o.focal_scale *= distance / 3.0;
  return o;
}

inline CellImage cell_of(const TriMesh& mesh, const CameraView& view, int face, int S = 128) {
  const ImagePatch patch = face_image_triangle(mesh, face, view);
  return extract_cell(view.image, affine_map(patch, S), S);
}

/// RMS over masked-in pixels at least `inset` pixels away from the triangle border.
inline double cell_rms(const CellImage& a, const CellImage& b, int inset = 0) {
  const int S = a.size();
  double sum = 0.0;
  int n = 0;
  for (int idx : a.triangle()->masked_indices()) {
    const int x = idx % S, y = idx / S;
    if (x < inset || y < inset || x + y > S - 1 - inset) continue;
    const double d = a.data()[idx] - b.data()[idx];
    sum += d * d;
    ++n;
  }
  return std::sqrt(sum / n);
}

/// Random projection matrix with the origin region in front of it.
inline Mat34 random_camera(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Eigen::Matrix3d R =
      Eigen::Quaterniond(Eigen::Vector4d(u(rng), u(rng), u(rng), u(rng)).normalized())
          .toRotationMatrix();
  Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
  K(0, 0) = 300.0 + 200.0 * u(rng);
  K(1, 1) = K(0, 0) * (1.0 + 0.1 * u(rng));
  K(0, 1) = 2.0 * u(rng);
  K(0, 2) = 256.0 + 20.0 * u(rng);
  K(1, 2) = 256.0 + 20.0 * u(rng);
  const Vec3 t(0.3 * u(rng), 0.3 * u(rng), 4.0 + u(rng));
  Mat34 P;
  P.leftCols<3>() = K * R;
  P.col(3) = K * t;
  return P;
}

inline Vec3 cam_space_point(const Mat34& P, std::mt19937_64& rng) {
  // A point at depth in [2, 6] along a random ray.
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Eigen::Matrix3d M = P.leftCols<3>();
  const Vec3 pix(256.0 + 150.0 * u(rng), 256.0 + 150.0 * u(rng), 1.0);
  const double d = 4.0 + 2.0 * u(rng);
  return M.inverse() * (d * pix - P.col(3));
}

}  // namespace texfair::testing
