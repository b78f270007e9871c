#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "texfair/eigentexture.hpp"
#include "texfair/geometry.hpp"
#include "texfair/robust.hpp"
#include "texfair/warp.hpp"

namespace texfair {

struct FairingConfig {
  int cell_size = 128;
  int k = 5;
  int levels = 5;
  double sigma_smooth_max = 6.0;
  double sigma_smooth_min = 1.2;
  int max_iters = 50;
  double step_tol = 1e-4;        // world units
  double trust_fraction = 0.1;   // of the mean incident edge length
  int max_sweeps = 10;
  double backtrack_factor = 0.5;
  int max_halvings = 8;
  double margin = 2.0;           // pixels beyond the image border a patch may reach
  bool center_cells = false;
  bool reproject_coeffs = true;
  bool expand_steps = true;
  std::optional<double> sigma_override;

  void validate() const;
};

/// Working mesh plus the calibrated views it is faired against.
struct Scene {
  TriMesh mesh;
  std::vector<CameraView> views;
};

/// One accepted (or final rejected) inner iteration of fair_vertex.
struct TraceRow {
  int sweep = 0;
  int vertex = 0;
  int level = 0;
  int iter = 0;
  Vec3 position = Vec3::Zero();
  double step_norm = 0.0;
  double energy = 0.0;         // robust objective after the step
  double energy_before = 0.0;  // same objective at the start of the iteration
  double sigma = 0.0;
  int backtracks = 0;
  bool accepted = true;
};

struct SkipRecord {
  int sweep = 0;
  int vertex = 0;
  std::string reason;
};

struct SweepSummary {
  int sweep = 0;
  double max_motion = 0.0;
  double total_energy = 0.0;
  int skipped = 0;
};

struct FairingTrace {
  std::vector<TraceRow> rows;
  std::vector<SkipRecord> skips;
  std::vector<SweepSummary> sweeps;
};

/// Cell-space flow at `cell_point` induced by moving the face vertex that
/// sits on canonical corner `moving_corner` by eta: the barycentric weight of
/// that corner times H_lin * J * eta.
Vec2 cell_pixel_displacement(const Vec2& cell_point, const Mat23& J, const AffineMap& map,
                             int moving_corner, const Vec3& eta, int cell_size);

/// e_c = grad . upsilon + (I - Uc).
double linearized_residual(double cell_value, double recon, const Vec2& grad,
                           const Vec2& upsilon);

/// Linearization data of one (face, view) pair at the current vertex position.
struct CellObservation {
  int face = -1;
  int view = -1;
  int moving_corner = -1;
  AffineMap map;
  Mat23 jacobian = Mat23::Zero();
  CellImage cell;   // smoothed
  CellImage recon;  // U_f c_i, frozen for the iteration
  CellGradient gradient;
};

/// All observations of the faces around one vertex at one smoothing level.
struct VertexObservations {
  int vertex = -1;
  Vec3 position = Vec3::Zero();
  double smoothing = 0.0;
  std::vector<CellObservation> cells;
  std::vector<EigenBasis> bases;
  std::vector<int> dropped_faces;  // incident faces with fewer than two views

  /// Signed masked-in residuals I - Uc of every observation.
  std::vector<double> residuals() const;
};

/// Projects, warps, smooths the incident faces of `vertex` placed at
/// `position` and rebuilds each face's basis and coefficients.
/// Throws NoObservations when no face keeps two views.
VertexObservations observe_vertex(const Scene& scene, int vertex, const Vec3& position,
                                  const FairingConfig& config, double smoothing);

/// Robust objective sum rho(I - Uc) with the cells re-extracted at
/// `position`; bases, coefficients and sigma stay frozen. Returns +inf if
/// any observation can no longer be extracted.
double frozen_objective(const Scene& scene, const VertexObservations& obs,
                        const Vec3& position, const GemanMcClure& norm,
                        const FairingConfig& config);

struct NormalEquations {
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  long pixels = 0;
};

/// Secant-weighted Gauss-Newton system at eta = 0.
NormalEquations assemble_normal_equations(std::span<const CellObservation> cells,
                                          const GemanMcClure& norm);

/// Solves A d = b with 1e-9 * trace(A) Tikhonov damping.
Eigen::Vector3d solve_normal_equations(const NormalEquations& system);

struct VertexResult {
  Vec3 position = Vec3::Zero();
  std::vector<TraceRow> rows;
  bool converged = true;  // false: some level hit max_iters above tolerance
};

VertexResult fair_vertex(const Scene& scene, int vertex, const FairingConfig& config,
                         int sweep = 0);

struct MeshResult {
  TriMesh mesh;
  FairingTrace trace;
};

/// Gauss-Seidel sweeps in vertex index order.
MeshResult fair_mesh(const Scene& scene, const FairingConfig& config);

}  // namespace texfair
