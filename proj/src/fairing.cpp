#include "texfair/fairing.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Cholesky>

#include "texfair/error.hpp"

namespace texfair {

namespace {

// Projection of `face` into `view` with `vertex` moved to `position`; empty
// when the pair cannot be observed there.
std::optional<ImagePatch> patch_at(const Scene& scene, int face, int view, int vertex,
                                   const Vec3& position, double margin) {
  const CameraView& cam = scene.views[view];
  ImagePatch patch;
  patch.face = face;
  patch.view = view;
  for (int j = 0; j < 3; ++j) {
    const int idx = scene.mesh.faces[face][j];
    const Vec3& X = idx == vertex ? position : scene.mesh.vertices[idx];
    if (depth(cam.P, X) <= kMinDepth) return std::nullopt;
    patch.corners[j] = project_point(cam.P, X);
  }
  if (std::abs(patch.signed_area()) < kMinPatchArea) return std::nullopt;
  if (!patch.within_bounds(cam.width(), cam.height(), margin)) return std::nullopt;
  return patch;
}

int corner_of(const Face& face, int vertex) {
  for (int j = 0; j < 3; ++j) {
    if (face[j] == vertex) return j;
  }
  return -1;
}

}  // namespace

void FairingConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidInput, what); };
  if (cell_size < 8) fail("cell size must be at least 8");
  if (k < 1) fail("k must be positive");
  if (levels < 1) fail("levels must be at least 1");
  if (!(sigma_smooth_max >= 0.0) || !(sigma_smooth_min >= 0.0)) fail("smoothing must be non-negative");
  if (max_iters < 1) fail("max iterations must be positive");
  if (!(step_tol > 0.0)) fail("step tolerance must be positive");
  if (!(trust_fraction > 0.0)) fail("trust fraction must be positive");
  if (max_sweeps < 1) fail("sweeps must be positive");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) fail("backtracking factor must be in (0,1)");
  if (max_halvings < 0) fail("halvings must be non-negative");
  if (!(margin >= 0.0)) fail("margin must be non-negative");
  if (sigma_override && !(*sigma_override > 0.0)) fail("sigma override must be positive");
}

Vec2 cell_pixel_displacement(const Vec2& cell_point, const Mat23& J, const AffineMap& map,
                             int moving_corner, const Vec3& eta, int cell_size) {
  const double weight = canonical_triangle(cell_size)->barycentric(cell_point)[moving_corner];
  return weight * (map.linear() * (J * eta));
}

double linearized_residual(double cell_value, double recon, const Vec2& grad,
                           const Vec2& upsilon) {
  return grad.dot(upsilon) + (cell_value - recon);
}

std::vector<double> VertexObservations::residuals() const {
  std::vector<double> out;
  for (const CellObservation& o : cells) {
    for (int idx : o.cell.triangle()->masked_indices()) {
      out.push_back(o.cell.data()[idx] - o.recon.data()[idx]);
    }
  }
  return out;
}

VertexObservations observe_vertex(const Scene& scene, int vertex, const Vec3& position,
                                  const FairingConfig& config, double smoothing) {
  VertexObservations out;
  out.vertex = vertex;
  out.position = position;
  out.smoothing = smoothing;

  for (int face : scene.mesh.incident_faces(vertex)) {
    const int corner = corner_of(scene.mesh.faces[face], vertex);
    std::vector<CellObservation> stack;
    for (int view = 0; view < static_cast<int>(scene.views.size()); ++view) {
      const auto patch = patch_at(scene, face, view, vertex, position, config.margin);
      if (!patch) continue;
      CellObservation o;
      o.face = face;
      o.view = view;
      o.moving_corner = corner;
      o.map = affine_map(*patch, config.cell_size);
      o.jacobian = pixel_displacement_jacobian(scene.views[view].P, position);
      o.cell = smooth_cell(extract_cell(scene.views[view].image, o.map, config.cell_size),
                           smoothing);
      stack.push_back(std::move(o));
    }
    if (stack.size() < 2) {
      out.dropped_faces.push_back(face);
      continue;
    }
    std::vector<CellImage> cells;
    cells.reserve(stack.size());
    for (const auto& o : stack) cells.push_back(o.cell);
    const int n = static_cast<int>(cells.size());
    EigenBasis basis = build_basis(cells, std::min(config.k, n), config.center_cells, face);
    for (auto& o : stack) {
      o.recon = reconstruct(basis, project_coeffs(basis, o.cell, o.view));
      o.gradient = cell_gradient(o.cell);
      out.cells.push_back(std::move(o));
    }
    out.bases.push_back(std::move(basis));
  }
  if (out.cells.empty()) {
    throw Error(ErrorCode::NoObservations,
                "vertex " + std::to_string(vertex) + " has no face seen in two views");
  }
  return out;
}

double frozen_objective(const Scene& scene, const VertexObservations& obs,
                        const Vec3& position, const GemanMcClure& norm,
                        const FairingConfig& config) {
  double total = 0.0;
  for (const CellObservation& o : obs.cells) {
    const auto patch = patch_at(scene, o.face, o.view, obs.vertex, position, config.margin);
    if (!patch) return std::numeric_limits<double>::infinity();
    const AffineMap map = affine_map(*patch, config.cell_size);
    const CellImage cell = smooth_cell(
        extract_cell(scene.views[o.view].image, map, config.cell_size), obs.smoothing);
    if (config.reproject_coeffs) {
      const EigenBasis* basis = nullptr;
      for (const auto& b : obs.bases) if (b.face == o.face) basis = &b;
      const CellImage recon = reconstruct(*basis, project_coeffs(*basis, cell, o.view));
      for (int idx : cell.triangle()->masked_indices()) {
        total += norm.rho(cell.data()[idx] - recon.data()[idx]);
      }
    } else {
      for (int idx : cell.triangle()->masked_indices()) {
        total += norm.rho(cell.data()[idx] - o.recon.data()[idx]);
      }
    }
  }
  return total;
}

NormalEquations assemble_normal_equations(std::span<const CellObservation> cells,
                                          const GemanMcClure& norm) {
  NormalEquations sys;
  for (const CellObservation& o : cells) {
    const CanonicalTriangle& tri = *o.cell.triangle();
    const int S = tri.size();
    // Cell flow per unit eta at the moving corner.
    const Mat23 M = o.map.linear() * o.jacobian;
    for (int idx : tri.masked_indices()) {
      const Vec2 p(idx % S, idx / S);
      const double lambda = tri.barycentric(p)[o.moving_corner];
      const Eigen::RowVector3d g =
          lambda * (o.gradient.gx[idx] * M.row(0) + o.gradient.gy[idx] * M.row(1));
      const double e = o.cell.data()[idx] - o.recon.data()[idx];
      sys.A.selfadjointView<Eigen::Upper>().rankUpdate(g.transpose(), norm.secant_weight(e));
      sys.b.noalias() -= norm.rho_dot(e) * g.transpose();
      ++sys.pixels;
    }
  }
  if (sys.pixels == 0) {
    throw Error(ErrorCode::NoObservations, "no masked-in pixels contribute");
  }
  sys.A.triangularView<Eigen::StrictlyLower>() = sys.A.transpose();
  return sys;
}

Eigen::Vector3d solve_normal_equations(const NormalEquations& system) {
  const double trace = system.A.trace();
  if (!(trace > 0.0)) return Eigen::Vector3d::Zero();
  const Eigen::Matrix3d damped = system.A + 1e-9 * trace * Eigen::Matrix3d::Identity();
  return damped.ldlt().solve(system.b);
}

VertexResult fair_vertex(const Scene& scene, int vertex, const FairingConfig& config,
                         int sweep) {
  config.validate();
  if (vertex < 0 || vertex >= static_cast<int>(scene.mesh.vertices.size())) {
    throw Error(ErrorCode::InvalidInput, "vertex index out of range");
  }
  if (scene.mesh.incident_faces(vertex).empty()) {
    throw Error(ErrorCode::NoObservations,
                "vertex " + std::to_string(vertex) + " has no incident face");
  }

  VertexResult result;
  Vec3 x = scene.mesh.vertices[vertex];
  const double trust = config.trust_fraction * scene.mesh.mean_incident_edge_length(vertex);
  const std::vector<double> schedule =
      smoothing_schedule(config.levels, config.sigma_smooth_max, config.sigma_smooth_min);

  for (int level = 0; level < config.levels; ++level) {
    bool level_converged = false;
    for (int iter = 0; iter < config.max_iters; ++iter) {
      const VertexObservations obs = observe_vertex(scene, vertex, x, config, schedule[level]);
      const std::vector<double> residuals = obs.residuals();
      const GemanMcClure norm(config.sigma_override ? RobustScale{*config.sigma_override}
                                                    : estimate_sigma(residuals));
      double energy0 = 0.0;
      for (double e : residuals) energy0 += norm.rho(e);

      const NormalEquations sys = assemble_normal_equations(obs.cells, norm);
      Vec3 step = solve_normal_equations(sys);
      const double len = step.norm();
      if (len > trust) step *= trust / len;

      TraceRow row;
      row.sweep = sweep;
      row.vertex = vertex;
      row.level = level;
      row.iter = iter;
      row.sigma = norm.sigma();
      row.energy_before = energy0;

      bool accepted = false;
      double scale = 1.0;
      int backtracks = 0;
      double energy = energy0;
      for (; backtracks <= config.max_halvings; ++backtracks) {
        const double trial = frozen_objective(scene, obs, x + scale * step, norm, config);
        if (trial <= energy0) {
          accepted = true;
          energy = trial;
          break;
        }
        scale *= config.backtrack_factor;
      }
      if (accepted && backtracks == 0 && config.expand_steps) {
        const double len0 = step.norm();
        while (2.0 * scale * len0 <= trust) {
          const double trial = frozen_objective(scene, obs, x + 2.0 * scale * step, norm, config);
          if (!(trial < energy)) break;
          energy = trial;
          scale *= 2.0;
        }
      }

      if (accepted) {
        x += scale * step;
        row.step_norm = scale * step.norm();
      }
      row.position = x;
      row.energy = energy;
      row.backtracks = accepted ? backtracks : config.max_halvings;
      row.accepted = accepted;
      result.rows.push_back(row);

      if (!accepted || row.step_norm < config.step_tol) {
        level_converged = true;
        break;
      }
    }
    if (!level_converged) result.converged = false;
  }
  result.position = x;
  return result;
}

MeshResult fair_mesh(const Scene& scene, const FairingConfig& config) {
  config.validate();
  MeshResult out;
  Scene work = scene;
  for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
    SweepSummary summary;
    summary.sweep = sweep;
    for (int v = 0; v < static_cast<int>(work.mesh.vertices.size()); ++v) {
      try {
        VertexResult r = fair_vertex(work, v, config, sweep);
        summary.max_motion =
            std::max(summary.max_motion, (r.position - work.mesh.vertices[v]).norm());
        if (!r.rows.empty()) summary.total_energy += r.rows.back().energy;
        work.mesh.vertices[v] = r.position;
        out.trace.rows.insert(out.trace.rows.end(), r.rows.begin(), r.rows.end());
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoObservations) throw;
        out.trace.skips.push_back({sweep, v, e.what()});
        ++summary.skipped;
      }
    }
    out.trace.sweeps.push_back(summary);
    if (summary.max_motion < config.step_tol) break;
  }
  out.mesh = std::move(work.mesh);
  return out;
}

}  // namespace texfair
