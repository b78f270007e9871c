#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "texfair/fairing.hpp"
#include "texfair/geometry.hpp"
#include "texfair/image.hpp"

namespace texfair {

/// Procedural grayscale texture on one cube face plane (coordinate `axis`
/// fixed at 1). Texture coordinates are the two remaining world coordinates
/// in increasing axis order, both in [0,1].
struct PlanarTexture {
  int axis = 0;
  int resolution = 512;
  std::vector<double> texels;  // resolution x resolution, texel centers at (i+0.5)/res

  Vec2 coords(const Vec3& point) const;
  /// Bilinear lookup, clamped at the texture border.
  double sample(const Vec2& st) const;
};

/// View-dependent bright band on one plane, standing in for a specular
/// highlight. Active only in the listed views.
struct StreakSpec {
  int axis = 0;
  double intensity = 0.45;
  double half_width = 0.04;     // in texture units
  std::vector<int> views;

  /// Center of the band along the first texture coordinate in `view`.
  double center(int view, int n_views) const;
  bool covers(const Vec2& st, int view, int n_views) const;
};

struct SynthOptions {
  std::uint64_t seed = 1;
  int n_views = 12;
  int image_size = 512;
  double distance = 3.0;          // camera distance from corner A
  double ring_degrees = 60.0;     // angular diameter of the camera ring around A's diagonal
  double focal_scale = 1.35;      // focal length in units of image_size
  double background = 0.25;
  std::optional<StreakSpec> streak;
};

/// Unit cube [0,1]^3 seen from the (1,1,1) octant. Only the three faces at
/// corner A = (1,1,1) are meshed, each as two triangles whose diagonal
/// avoids A, so A has exactly three incident triangles.
struct SyntheticScene {
  TriMesh true_mesh;
  TriMesh work_mesh;
  std::vector<CameraView> views;
  std::vector<PlanarTexture> textures;  // indexed by plane axis
  std::vector<int> face_axis;           // plane axis of every triangle
  SynthOptions options;

  Scene scene() const { return {work_mesh, views}; }
};

inline constexpr int kCornerA = 0;

SyntheticScene make_cube_scene(const SynthOptions& options = {});

/// Perspective-correct render of the true mesh and textures.
GrayImage render_view(const SyntheticScene& scene, int view);

/// Moves a work-mesh vertex; renders and the true mesh are untouched.
SyntheticScene perturb_vertex(const SyntheticScene& scene, int vertex, const Vec3& offset);

/// Unit vector drawn deterministically from (seed, stream).
Vec3 seeded_direction(std::uint64_t seed, std::uint64_t stream);

/// Looks at `target` from `center`; image y points down, world z is up.
Mat34 look_at_camera(const Vec3& center, const Vec3& target, double focal, double cx,
                     double cy);

}  // namespace texfair
