// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <Eigen/SVD>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <sstream>
#include <string>

#include "support.hpp"
#include "texfair/eigentexture.hpp"
#include "texfair/fairing.hpp"
#include "texfair/io.hpp"
#include "texfair/robust.hpp"

using namespace texfair;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec3 octant(int d) {
  return Vec3(d & 1 ? 1 : -1, d & 2 ? 1 : -1, d & 4 ? 1 : -1).normalized();
}

std::vector<TraceRow> all_rows;

double run_corner(const SyntheticScene& base, const Vec3& offset, const FairingConfig& cfg) {
  const SyntheticScene sc = perturb_vertex(base, kCornerA, offset);
  const VertexResult r = fair_vertex(sc.scene(), kCornerA, cfg);
  all_rows.insert(all_rows.end(), r.rows.begin(), r.rows.end());
  return (r.position - base.true_mesh.vertices[kCornerA]).norm();
}

void criterion_1(const SyntheticScene& s) {
  const auto t0 = std::chrono::steady_clock::now();
  int ok = 0;
  double worst = 0.0;
  std::string errs;
  for (int d = 0; d < 8; ++d) {
    const double e = run_corner(s, 0.05 * octant(d), FairingConfig{});
    ok += e < 0.01;
    worst = std::max(worst, e);
    errs += fmt("%.4f ", e);
  }
  report(1, ok == 8, fmt("%d/8 within 0.01 edge, errors [%s], worst %.4f, %.0f s", ok, errs.c_str(), worst,
                         seconds_since(t0)));
}

void criterion_2(const SyntheticScene& s) {
  const Vec3 inward = -Vec3::Ones().normalized();
  const auto t0 = std::chrono::steady_clock::now();
  const double pyramid = run_corner(s, 0.15 * inward, FairingConfig{});
  FairingConfig single;
  single.levels = 1;
  const double flat = run_corner(s, 0.15 * inward, single);
  report(2, pyramid < 0.01,
         fmt("0.15 edge inward: 5-level error %.4f (%s), single-level error %.4f (%s, recorded only), %.0f s",
             pyramid, pyramid < 0.01 ? "converged" : "not converged", flat,
             flat < 0.01 ? "converged" : "not converged", seconds_since(t0)));
}

void criterion_3() {
  long violations = 0;
  double worst = 0.0;
  for (const TraceRow& r : all_rows) {
    if (r.energy > r.energy_before) {
      ++violations;
      worst = std::max(worst, r.energy - r.energy_before);
    }
  }
  report(3, violations == 0 && !all_rows.empty(),
         fmt("%ld trace rows, %ld increases of E (largest %.3g)", static_cast<long>(all_rows.size()), violations,
             worst));
}

// Frozen linearized objective sum rho(e_c(eta)), written out directly.
double linearized_objective(const VertexObservations& obs, const Vec3& eta, double sigma) {
  double total = 0.0;
  for (const CellObservation& o : obs.cells) {
    const int S = o.cell.size();
    const Vec2 flow = o.map.H.leftCols<2>() * (o.jacobian * eta);
    for (int idx : o.cell.triangle()->masked_indices()) {
      const double x = idx % S, y = idx / S;
      const double a = x / (S - 1), b = y / (S - 1);
      const double w = o.moving_corner == 0 ? 1.0 - a - b : (o.moving_corner == 1 ? a : b);
      const double e = w * (o.gradient.gx[idx] * flow.x() + o.gradient.gy[idx] * flow.y()) +
                       (o.cell.data()[idx] - o.recon.data()[idx]);
      total += e * e / (sigma + e * e);
    }
  }
  return total;
}

void criterion_4(const SyntheticScene& s) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> mag(0.0, 0.05);
  std::uniform_int_distribution<int> level(0, 4), pick(0, 3);
  const int vertices[] = {0, 1, 3, 5};
  const std::vector<double> schedule = smoothing_schedule(5, 6.0, 1.2);
  FairingConfig cfg;
  double worst = 0.0;
  int configs = 0;
  for (int t = 0; t < 50; ++t) {
    const int v = vertices[pick(rng)];
    const Vec3 pos = s.true_mesh.vertices[v] + mag(rng) * seeded_direction(77, t);
    const double smoothing = schedule[level(rng)];
    const VertexObservations obs = observe_vertex(s.scene(), v, pos, cfg, smoothing);
    const double sigma = estimate_sigma(obs.residuals()).sigma;
    const NormalEquations sys = assemble_normal_equations(obs.cells, GemanMcClure(sigma));
    Eigen::Vector3d fd;
    const double h = 1e-5;
    for (int c = 0; c < 3; ++c) {
      Vec3 e = Vec3::Zero();
      e[c] = h;
      fd[c] = (-linearized_objective(obs, 2 * e, sigma) + 8 * linearized_objective(obs, e, sigma) -
               8 * linearized_objective(obs, -e, sigma) + linearized_objective(obs, -2 * e, sigma)) /
              (12 * h);
    }
    worst = std::max(worst, (-sys.b - fd).norm() / fd.norm());
    ++configs;
  }
  report(4, configs == 50 && worst < 1e-6, fmt("%d configurations, worst relative error %.2e", configs, worst));
}

std::vector<CellImage> random_cells(int S, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<CellImage> cells;
  for (int i = 0; i < n; ++i) {
    CellImage c(canonical_triangle(S));
    for (int idx : c.triangle()->masked_indices()) c.data()[idx] = u(rng);
    cells.push_back(std::move(c));
  }
  return cells;
}

void criterion_5(const SyntheticScene& s) {
  double ortho = 0.0, full = 0.0, eckart = 0.0;
  bool monotone = true;
  for (int f = 0; f < 6; ++f) {
    std::vector<CellImage> cells;
    for (int v = 0; v < 12; ++v) cells.push_back(testing::cell_of(s.true_mesh, s.views[v], f));
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 12; ++k) {
      const EigenBasis b = build_basis(cells, k);
      ortho = std::max(ortho, (b.basis.transpose() * b.basis - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff());
      const CoherenceResult r = coherence_residuals(b, cells);
      if (r.total_squared > previous) monotone = false;
      previous = r.total_squared;
      if (k == 12) full = std::max(full, r.rms);
    }
  }
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto cells = random_cells(8, 8, seed);
    Eigen::MatrixXd M(cells.front().triangle()->masked_count(), 8);
    for (int i = 0; i < 8; ++i) M.col(i) = cells[i].masked_vector();
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues();
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 8; ++k) {
      const CoherenceResult r = coherence_residuals(build_basis(cells, k), cells);
      eckart = std::max(eckart, std::abs(r.total_squared - sv.tail(8 - k).squaredNorm()));
      if (r.total_squared > previous + 1e-12) monotone = false;
      previous = r.total_squared;
    }
  }
  report(5, ortho < 1e-8 && full < 1e-6 && monotone && eckart < 1e-8,
         fmt("orthonormality %.1e, full-rank RMS %.1e, monotone in k: %s, Eckart-Young gap %.1e", ortho, full,
             monotone ? "yes" : "no", eckart));
}

// Distance-from-eigenspace RMS pooled over the faces around corner A.
double corner_rms(const TriMesh& mesh, const SyntheticScene& s) {
  double sq = 0.0;
  long n = 0;
  for (int f : mesh.incident_faces(kCornerA)) {
    std::vector<CellImage> cells;
    for (int v = 0; v < 12; ++v) cells.push_back(testing::cell_of(mesh, s.views[v], f));
    const EigenBasis b = build_basis(cells, 5);
    const CoherenceResult r = coherence_residuals(b, cells);
    const long count = 12L * b.triangle->masked_count();
    sq += r.rms * r.rms * count;
    n += count;
  }
  return std::sqrt(sq / n);
}

void criterion_6(const SyntheticScene& s) {
  double min_energy = 1.0, worst_rms = 0.0;
  for (int f = 0; f < 6; ++f) {
    std::vector<CellImage> cells;
    for (int v = 0; v < 12; ++v) cells.push_back(testing::cell_of(s.true_mesh, s.views[v], f));
    const EigenBasis b = build_basis(cells, 5);
    min_energy = std::min(min_energy, b.singular_values.head(5).squaredNorm() / b.singular_values.squaredNorm());
    worst_rms = std::max(worst_rms, coherence_residuals(b, cells).rms);
  }
  const double planar = corner_rms(s.true_mesh, s);
  double worst_ratio = 1e9;
  for (int d = 0; d < 8; ++d) {
    const SyntheticScene moved = perturb_vertex(s, kCornerA, 0.05 * octant(d));
    worst_ratio = std::min(worst_ratio, corner_rms(moved.work_mesh, s) / planar);
  }
  report(6, min_energy >= 0.99 && worst_rms < 0.02 && worst_ratio >= 1.5,
         fmt("k=5 energy >= %.5f, worst face RMS %.4f, RMS growth after 0.05 offset >= %.2fx", min_energy, worst_rms,
             worst_ratio));
}

void criterion_7() {
  double closed = 0.0;
  closed = std::max(closed, std::abs(rho(0.0, 100.0)));
  closed = std::max(closed, std::abs(rho(10.0, 100.0) - 0.5));
  closed = std::max(closed, std::abs(rho_ddot(std::sqrt(100.0 / 3.0), 100.0)));
  for (double s : {0.01, 1.0, 100.0}) closed = std::max(closed, std::abs(secant_weight(0.0, s) - 2.0 / s) * s);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ue(-10.0, 10.0), us(0.01, 100.0);
  double deriv = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const double e = ue(rng), s = us(rng);
    const double h = 1e-5 * std::max(1.0, std::abs(e));
    deriv = std::max(deriv, std::abs((rho(e + h, s) - rho(e - h, s)) / (2 * h) - rho_dot(e, s)));
    deriv = std::max(deriv, std::abs((rho_dot(e + h, s) - rho_dot(e - h, s)) / (2 * h) - rho_ddot(e, s)) /
                                std::max(1.0, std::abs(rho_ddot(e, s))));
  }
  report(7, closed <= 1e-12 && deriv < 1e-6, fmt("closed forms off by %.1e, derivatives vs differences %.1e", closed, deriv));
}

void criterion_8() {
  std::mt19937_64 rng(8);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Mat34 P = testing::random_camera(rng);
    const Vec3 x = testing::cam_space_point(P, rng);
    const Mat23 J = pixel_displacement_jacobian(P, x);
    Mat23 fd;
    const double h = 1e-6;
    for (int c = 0; c < 3; ++c) {
      Vec3 e = Vec3::Zero();
      e[c] = h;
      fd.col(c) = (project_point(P, x + e) - project_point(P, x - e)) / (2 * h);
    }
    worst = std::max(worst, (J - fd).norm() / fd.norm());
  }
  report(8, worst < 1e-5, fmt("100 cameras, worst relative error %.2e", worst));
}

int shell(const std::string& cmd) { return std::system((cmd + " > /dev/null").c_str()); }

void criterion_9() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = fs::temp_directory_path() / "texfair_acceptance_det";
  fs::remove_all(dir);
  const std::string cli = TEXFAIR_CLI;
  const std::string scene = (dir / "scene").string();
  bool ok = shell(cli + " synth --out " + scene + " --perturb A:0.05") == 0;
  for (const char* run : {"a", "b"}) {
    const fs::path out = dir / run;
    fs::create_directories(out);
    ok = ok && shell(cli + " fair --mesh " + scene + "/cube_perturbed.obj --cams " + scene + "/cams.txt --images " +
                     scene + "/images --sweeps 2 --out " + (out / "faired.obj").string() + " --trace " +
                     (out / "t.csv").string()) == 0;
  }
  const bool same_mesh = ok && read_file(dir / "a" / "faired.obj") == read_file(dir / "b" / "faired.obj");
  const bool same_trace = ok && read_file(dir / "a" / "t.csv") == read_file(dir / "b" / "t.csv");
  report(9, ok && same_mesh && same_trace,
         fmt("two CLI runs: faired mesh %s, trace %s, %.0f s", same_mesh ? "identical" : "differs",
             same_trace ? "identical" : "differs", seconds_since(t0)));
}

}  // namespace

int main() {
  const SyntheticScene& s = testing::cube();
  criterion_1(s);
  criterion_2(s);
  criterion_3();
  criterion_4(s);
  criterion_5(s);
  criterion_6(s);
  criterion_7();
  criterion_8();
  criterion_9();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
