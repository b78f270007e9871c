#include "texfair/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "texfair/error.hpp"

namespace texfair {

namespace {

constexpr double kPi = std::numbers::pi;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int first_axis(int axis) { return axis == 0 ? 1 : 0; }
int second_axis(int axis) { return axis == 2 ? 1 : 2; }

// Every face samples the same seeded solid function so that neighbouring
// faces agree along their shared edge.
struct SolidTexture {
  struct Wave {
    Vec3 k;
    double phase, amp;
  };
  Vec3 checker_phase;
  double checker_freq = 3.0;
  std::vector<Wave> waves;
  double amp_total = 0.0;

  explicit SolidTexture(std::uint64_t seed) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 1);
    for (int a = 0; a < 3; ++a) checker_phase[a] = 2.0 * kPi * uniform01(rng);
    waves.resize(10);
    for (Wave& w : waves) {
      const double freq = 1.0 + 6.0 * uniform01(rng);
      const double z = 2.0 * uniform01(rng) - 1.0;
      const double phi = 2.0 * kPi * uniform01(rng);
      const double r = std::sqrt(1.0 - z * z);
      w.k = freq * Vec3(r * std::cos(phi), r * std::sin(phi), z);
      w.phase = 2.0 * kPi * uniform01(rng);
      w.amp = 0.5 + uniform01(rng);
      amp_total += w.amp;
    }
  }

  double operator()(const Vec3& p) const {
    Vec3 s;
    for (int a = 0; a < 3; ++a) s[a] = std::sin(2.0 * kPi * checker_freq * p[a] + checker_phase[a]);
    const double checker = std::tanh(2.5 * (s[0] * s[1] + s[1] * s[2] + s[2] * s[0]));
    double noise = 0.0;
    for (const Wave& w : waves) noise += w.amp * std::cos(2.0 * kPi * w.k.dot(p) + w.phase);
    noise /= amp_total;
    return std::clamp(0.5 + 0.22 * checker + 0.2 * noise, 0.02, 0.98);
  }
};

PlanarTexture make_texture(int axis, const SolidTexture& solid, int resolution) {
  PlanarTexture tex;
  tex.axis = axis;
  tex.resolution = resolution;
  tex.texels.resize(static_cast<std::size_t>(resolution) * resolution);
  Vec3 p = Vec3::Ones();
  for (int j = 0; j < resolution; ++j) {
    p[second_axis(axis)] = (j + 0.5) / resolution;
    for (int i = 0; i < resolution; ++i) {
      p[first_axis(axis)] = (i + 0.5) / resolution;
      tex.texels[static_cast<std::size_t>(j) * resolution + i] = solid(p);
    }
  }
  return tex;
}

}  // namespace

Vec2 PlanarTexture::coords(const Vec3& point) const {
  return {point[first_axis(axis)], point[second_axis(axis)]};
}

double PlanarTexture::sample(const Vec2& st) const {
  const double x = std::clamp(st.x() * resolution - 0.5, 0.0, resolution - 1.0);
  const double y = std::clamp(st.y() * resolution - 0.5, 0.0, resolution - 1.0);
  const int x0 = std::min(static_cast<int>(x), resolution - 2);
  const int y0 = std::min(static_cast<int>(y), resolution - 2);
  const double fx = x - x0;
  const double fy = y - y0;
  auto at = [&](int i, int j) { return texels[static_cast<std::size_t>(j) * resolution + i]; };
  const double top = (1.0 - fx) * at(x0, y0) + fx * at(x0 + 1, y0);
  const double bottom = (1.0 - fx) * at(x0, y0 + 1) + fx * at(x0 + 1, y0 + 1);
  return (1.0 - fy) * top + fy * bottom;
}

double StreakSpec::center(int view, int n_views) const {
  const double f = n_views > 1 ? static_cast<double>(view) / (n_views - 1) : 0.5;
  return 0.2 + 0.6 * f;
}

bool StreakSpec::covers(const Vec2& st, int view, int n_views) const {
  if (std::find(views.begin(), views.end(), view) == views.end()) return false;
  return std::abs(st.x() - center(view, n_views)) <= half_width;
}

Vec3 seeded_direction(std::uint64_t seed, std::uint64_t stream) {
  std::mt19937_64 rng(seed ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
  const double z = 2.0 * uniform01(rng) - 1.0;
  const double phi = 2.0 * kPi * uniform01(rng);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

Mat34 look_at_camera(const Vec3& center, const Vec3& target, double focal, double cx,
                     double cy) {
  const Vec3 forward = (target - center).normalized();
  const Vec3 right = forward.cross(Vec3::UnitZ()).normalized();
  const Vec3 down = forward.cross(right);
  Eigen::Matrix3d R;
  R.row(0) = right.transpose();
  R.row(1) = down.transpose();
  R.row(2) = forward.transpose();
  Eigen::Matrix3d K;
  K << focal, 0.0, cx, 0.0, focal, cy, 0.0, 0.0, 1.0;
  Mat34 Rt;
  Rt.leftCols<3>() = R;
  Rt.col(3) = -R * center;
  return K * Rt;
}

SyntheticScene make_cube_scene(const SynthOptions& options) {
  if (options.n_views < 2) {
    throw Error(ErrorCode::InvalidInput, "synthetic scene needs at least two views");
  }
  if (options.image_size < 16) {
    throw Error(ErrorCode::InvalidInput, "synthetic image size too small");
  }
  SyntheticScene scene;
  scene.options = options;

  TriMesh& mesh = scene.true_mesh;
  mesh.vertices = {Vec3(1, 1, 1), Vec3(1, 0, 1), Vec3(1, 0, 0), Vec3(1, 1, 0),
                   Vec3(0, 1, 0), Vec3(0, 1, 1), Vec3(0, 0, 1)};
  // Outward-oriented; A leads each of its three triangles.
  mesh.faces = {{0, 1, 3}, {2, 3, 1},   // x = 1
                {0, 3, 5}, {4, 5, 3},   // y = 1
                {0, 5, 1}, {6, 1, 5}};  // z = 1
  scene.face_axis = {0, 0, 1, 1, 2, 2};
  mesh.validate();
  scene.work_mesh = mesh;

  const SolidTexture solid(options.seed);
  for (int axis = 0; axis < 3; ++axis) scene.textures.push_back(make_texture(axis, solid, 512));

  const Vec3 corner = mesh.vertices[kCornerA];
  const double size = options.image_size;
  const double focal = options.focal_scale * size;
  const double c = (size - 1.0) / 2.0;
  // Cameras sit on a ring around the outward diagonal at A, evenly spaced.
  const Vec3 axis = Vec3(1, 1, 1).normalized();
  const Vec3 u = Vec3(-1, 1, 0).normalized();
  const Vec3 w = u.cross(axis);
  const double radius = 0.5 * options.ring_degrees * kPi / 180.0;
  for (int i = 0; i < options.n_views; ++i) {
    const double phi = 2.0 * kPi * i / options.n_views;
    const Vec3 dir = std::cos(radius) * axis +
                     std::sin(radius) * (std::cos(phi) * u + std::sin(phi) * w);
    CameraView view;
    view.P = look_at_camera(corner + options.distance * dir, corner, focal, c, c);
    scene.views.push_back(std::move(view));
  }

  // Every face front-facing and at least 2 px inside every image.
  for (int i = 0; i < options.n_views; ++i) {
    const Mat34& P = scene.views[i].P;
    const Vec3 center = -P.leftCols<3>().inverse() * P.col(3);
    for (int f = 0; f < static_cast<int>(mesh.faces.size()); ++f) {
      Vec3 normal = Vec3::Zero();
      normal[scene.face_axis[f]] = 1.0;
      const Vec3& X = mesh.vertices[mesh.faces[f][0]];
      if ((center - X).dot(normal) <= 0.0) {
        throw Error(ErrorCode::InvalidInput,
                    "face " + std::to_string(f) + " is back-facing in view " + std::to_string(i));
      }
      for (int idx : mesh.faces[f]) {
        const Vec2 u = project_point(P, mesh.vertices[idx]);
        if (u.x() < 2.0 || u.y() < 2.0 || u.x() > size - 3.0 || u.y() > size - 3.0) {
          throw Error(ErrorCode::InvalidInput, "face " + std::to_string(f) +
                                                   " leaves the image in view " +
                                                   std::to_string(i));
        }
      }
    }
  }

  for (int i = 0; i < options.n_views; ++i) scene.views[i].image = render_view(scene, i);
  return scene;
}

GrayImage render_view(const SyntheticScene& scene, int view) {
  const CameraView& cam = scene.views.at(view);
  const int size = scene.options.image_size;
  GrayImage image(size, size, scene.options.background);

  const Eigen::Matrix3d Minv = cam.P.leftCols<3>().inverse();
  const Vec3 center = -Minv * cam.P.col(3);
  const TriMesh& mesh = scene.true_mesh;

  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const Vec3 dir = Minv * Vec3(x, y, 1.0);
      double best_t = std::numeric_limits<double>::infinity();
      int best_face = -1;
      Vec3 best_point;
      for (int f = 0; f < static_cast<int>(mesh.faces.size()); ++f) {
        const Vec3& a = mesh.vertices[mesh.faces[f][0]];
        const Vec3& b = mesh.vertices[mesh.faces[f][1]];
        const Vec3& c = mesh.vertices[mesh.faces[f][2]];
        const Vec3 n = (b - a).cross(c - a);
        const double denom = n.dot(dir);
        if (std::abs(denom) < 1e-15) continue;
        const double t = n.dot(a - center) / denom;
        if (t <= 0.0 || t >= best_t) continue;
        const Vec3 p = center + t * dir;
        // Inside test with a small tolerance so shared edges leave no cracks.
        const double area2 = n.squaredNorm();
        const double w0 = (c - b).cross(p - b).dot(n) / area2;
        const double w1 = (a - c).cross(p - c).dot(n) / area2;
        const double w2 = 1.0 - w0 - w1;
        const double eps = -1e-9;
        if (w0 < eps || w1 < eps || w2 < eps) continue;
        best_t = t;
        best_face = f;
        best_point = p;
      }
      if (best_face < 0) continue;
      const int axis = scene.face_axis[best_face];
      const PlanarTexture& tex = scene.textures[axis];
      const Vec2 st = tex.coords(best_point);
      double value = tex.sample(st);
      if (scene.options.streak && scene.options.streak->axis == axis &&
          scene.options.streak->covers(st, view, static_cast<int>(scene.views.size()))) {
        value = std::min(1.0, value + scene.options.streak->intensity);
      }
      image.at(x, y) = value;
    }
  }
  return image;
}

SyntheticScene perturb_vertex(const SyntheticScene& scene, int vertex, const Vec3& offset) {
  if (vertex < 0 || vertex >= static_cast<int>(scene.work_mesh.vertices.size())) {
    throw Error(ErrorCode::InvalidInput, "vertex index out of range");
  }
  SyntheticScene out = scene;
  out.work_mesh.vertices[vertex] += offset;
  return out;
}

}  // namespace texfair
