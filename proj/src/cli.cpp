#include "texfair/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "texfair/error.hpp"
#include "texfair/io.hpp"

namespace texfair {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return kExitIo;
    case ErrorCode::InvalidInput:
    case ErrorCode::InvalidMesh:
    case ErrorCode::KTooLarge:
    case ErrorCode::MaskMismatch:
    case ErrorCode::NonPositiveSigma: return kExitUsage;
    default: return kExitFailure;
  }
}

// One machine-readable line per failure.
int report_error(std::ostream& err, ErrorCode code, const std::string& message) {
  err << "error: code=" << to_string(code) << " message=\"" << message << "\"\n";
  return exit_code_for(code);
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return report_error(err, e.code(), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error(err, ErrorCode::Io, e.what());
  }
}

TraceHeader trace_header(const RunManifest& m, std::size_t views) {
  const FairingConfig& c = m.config;
  return {{"cell_size", std::to_string(c.cell_size)},
          {"k", std::to_string(c.k)},
          {"levels", std::to_string(c.levels)},
          {"sigma_smooth_max", num(c.sigma_smooth_max)},
          {"sigma_smooth_min", num(c.sigma_smooth_min)},
          {"max_iters", std::to_string(c.max_iters)},
          {"tol", num(c.step_tol)},
          {"sweeps", std::to_string(c.max_sweeps)},
          {"trust", num(c.trust_fraction)},
          {"seed", std::to_string(m.seed)},
          {"mesh", m.mesh.filename().string()},
          {"views", std::to_string(views)}};
}

void dump_cells(const std::filesystem::path& dir, const Scene& scene, int cell_size) {
  std::filesystem::create_directories(dir);
  for (int f = 0; f < static_cast<int>(scene.mesh.faces.size()); ++f) {
    for (int v = 0; v < static_cast<int>(scene.views.size()); ++v) {
      ImagePatch patch;
      AffineMap map;
      try {
        patch = face_image_triangle(scene.mesh, f, scene.views[v], v);
        map = affine_map(patch, cell_size);
      } catch (const Error&) {
        continue;
      }
      const CellImage cell = extract_cell(scene.views[v].image, map, cell_size);
      GrayImage raster(cell_size, cell_size, 0.0);
      for (int y = 0; y < cell_size; ++y) {
        for (int x = 0; x < cell_size; ++x) raster.at(x, y) = cell.at(x, y);
      }
      char stem[64];
      std::snprintf(stem, sizeof stem, "cell_f%02d_v%02d", f, v);
      write_pgm(dir / (std::string(stem) + ".pgm"), raster);
      std::ostringstream side;
      side << "face=" << f << "\nview=" << v << "\n";
      side << "H=";
      for (int i = 0; i < 6; ++i) side << num(map.H(i / 3, i % 3)) << (i == 5 ? "\n" : ",");
      side << "masked=" << cell.triangle()->masked_count() << "\n";
      side << "out_of_image=" << cell.out_of_image() << "\n";
      write_file_atomic(dir / (std::string(stem) + ".txt"), side.str());
    }
  }
}

int vertex_id(const std::string& name, int vertex_count) {
  if (name == "A" || name == "a") return kCornerA;
  int id = -1;
  try {
    std::size_t used = 0;
    id = std::stoi(name, &used);
    if (used != name.size()) id = -1;
  } catch (const std::exception&) {
    id = -1;
  }
  if (id < 0 || id >= vertex_count) {
    throw Error(ErrorCode::InvalidInput, "unknown vertex '" + name + "'");
  }
  return id;
}

double parse_number(const std::string& s, const std::string& spec) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidInput, "bad number in perturbation '" + spec + "'");
}

}  // namespace

std::pair<int, Vec3> parse_perturbation(const std::string& spec, std::uint64_t seed,
                                        int vertex_count) {
  const std::size_t colon = spec.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::InvalidInput, "perturbation '" + spec + "' lacks ':'");
  }
  const int id = vertex_id(spec.substr(0, colon), vertex_count);
  const std::string rest = spec.substr(colon + 1);
  std::vector<std::string> parts;
  std::stringstream ss(rest);
  for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
  if (parts.size() == 1) {
    const double mag = parse_number(parts[0], spec);
    return {id, mag * seeded_direction(seed, static_cast<std::uint64_t>(id))};
  }
  if (parts.size() == 3) {
    return {id, Vec3(parse_number(parts[0], spec), parse_number(parts[1], spec),
                     parse_number(parts[2], spec))};
  }
  throw Error(ErrorCode::InvalidInput, "perturbation '" + spec + "' needs 1 or 3 numbers");
}

int cmd_fair(const RunManifest& m, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    m.config.validate();
    Scene scene;
    scene.mesh = read_obj(m.mesh);
    const std::vector<Mat34> cams = read_cameras(m.cameras);
    const std::vector<std::filesystem::path> images = list_images(m.images);
    if (cams.size() != images.size()) {
      throw Error(ErrorCode::InvalidInput,
                  std::to_string(cams.size()) + " cameras but " + std::to_string(images.size()) +
                      " images in " + m.images.string());
    }
    if (cams.empty()) throw Error(ErrorCode::InvalidInput, "no views given");
    for (std::size_t i = 0; i < cams.size(); ++i) {
      CameraView view;
      view.P = cams[i];
      view.image = read_pgm(images[i]);
      scene.views.push_back(std::move(view));
    }

    const MeshResult result = fair_mesh(scene, m.config);
    for (const SweepSummary& s : result.trace.sweeps) {
      out << "sweep " << s.sweep << " max_motion=" << num(s.max_motion)
          << " E=" << num(s.total_energy) << " skipped=" << s.skipped << "\n";
    }
    for (const SkipRecord& s : result.trace.skips) {
      out << "skip sweep=" << s.sweep << " vertex=" << s.vertex << " reason=\"" << s.reason
          << "\"\n";
    }
    write_obj(m.out, result.mesh);
    write_trace_csv(m.trace, result.trace, trace_header(m, scene.views.size()));
    if (m.dump_dir) {
      Scene faired{result.mesh, scene.views};
      dump_cells(*m.dump_dir, faired, m.config.cell_size);
    }
    return kExitOk;
  });
}

int cmd_synth(const SynthRequest& r, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    SyntheticScene scene = make_cube_scene(r.options);
    std::filesystem::create_directories(r.out_dir);
    write_obj(r.out_dir / "cube.obj", scene.true_mesh);
    std::vector<Mat34> cams;
    for (const CameraView& v : scene.views) cams.push_back(v.P);
    write_cameras(r.out_dir / "cams.txt", cams);
    const std::filesystem::path img_dir = r.out_dir / "images";
    std::filesystem::create_directories(img_dir);
    for (std::size_t i = 0; i < scene.views.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "view_%02zu.pgm", i);
      write_pgm(img_dir / name, scene.views[i].image);
    }
    if (!r.perturb.empty()) {
      const int n = static_cast<int>(scene.work_mesh.vertices.size());
      for (const std::string& spec : r.perturb) {
        const auto [id, offset] = parse_perturbation(spec, r.options.seed, n);
        scene = perturb_vertex(scene, id, offset);
        out << "perturbed vertex " << id << " by " << num(offset.x()) << " " << num(offset.y())
            << " " << num(offset.z()) << "\n";
      }
      write_obj(r.out_dir / "cube_perturbed.obj", scene.work_mesh);
    }
    out << "wrote " << scene.views.size() << " views to " << r.out_dir.string() << "\n";
    return kExitOk;
  });
}

int cmd_report(const ReportRequest& r, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const TraceTable table = read_trace_csv(r.trace);
    std::optional<TriMesh> truth;
    if (r.truth) {
      truth = read_obj(*r.truth);
    } else {
      out << "notice: no ground truth given; position-error series omitted\n";
    }
    std::map<int, std::vector<const TraceRow*>> by_vertex;
    for (const TraceRow& row : table.rows) by_vertex[row.vertex].push_back(&row);

    std::filesystem::create_directories(r.out_dir);
    for (const auto& [vertex, rows] : by_vertex) {
      std::vector<std::vector<double>> energy;
      std::vector<std::vector<double>> error;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const TraceRow& t = *rows[i];
        const std::vector<double> key = {static_cast<double>(i), static_cast<double>(t.sweep),
                                         static_cast<double>(t.level),
                                         static_cast<double>(t.iter)};
        std::vector<double> e = key;
        e.push_back(t.energy_before);
        e.push_back(t.energy);
        energy.push_back(std::move(e));
        if (truth) {
          if (vertex < 0 || vertex >= static_cast<int>(truth->vertices.size())) {
            throw Error(ErrorCode::InvalidInput,
                        "trace vertex " + std::to_string(vertex) + " not in ground-truth mesh");
          }
          std::vector<double> p = key;
          p.push_back((t.position - truth->vertices[vertex]).norm());
          error.push_back(std::move(p));
        }
      }
      const std::string v = std::to_string(vertex);
      write_file_atomic(r.out_dir / ("energy_v" + v + ".tsv"),
                        format_tsv({"step", "sweep", "level", "iter", "E0", "E"}, energy));
      if (truth) {
        write_file_atomic(r.out_dir / ("error_v" + v + ".tsv"),
                          format_tsv({"step", "sweep", "level", "iter", "error"}, error));
      }
      out << "vertex " << vertex << ": " << rows.size() << " rows\n";
    }
    return kExitOk;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-view texture-coherence mesh fairing"};
  app.require_subcommand(1);

  RunManifest fair;
  std::string dump_dir;
  auto* fair_cmd = app.add_subcommand("fair", "Fair a mesh against calibrated images");
  fair_cmd->add_option("--mesh", fair.mesh, "Input OBJ mesh")->required();
  fair_cmd->add_option("--cams", fair.cameras, "Camera file, 12 numbers per line")->required();
  fair_cmd->add_option("--images", fair.images, "Directory of PGM images")->required();
  fair_cmd->add_option("--out", fair.out, "Faired OBJ output")->required();
  fair_cmd->add_option("--trace", fair.trace, "Trace CSV output")->required();
  fair_cmd->add_option("--dump-dir", dump_dir, "Write final cell images here");
  fair_cmd->add_option("--cell-size", fair.config.cell_size, "Cell size S")->capture_default_str();
  fair_cmd->add_option("--k", fair.config.k, "Basis dimension")->capture_default_str();
  fair_cmd->add_option("--levels", fair.config.levels, "Pyramid levels")->capture_default_str();
  fair_cmd->add_option("--sigma-smooth-max", fair.config.sigma_smooth_max)->capture_default_str();
  fair_cmd->add_option("--sigma-smooth-min", fair.config.sigma_smooth_min)->capture_default_str();
  fair_cmd->add_option("--max-iters", fair.config.max_iters, "Iterations per level")
      ->capture_default_str();
  fair_cmd->add_option("--tol", fair.config.step_tol, "Step tolerance (world units)")
      ->capture_default_str();
  fair_cmd->add_option("--sweeps", fair.config.max_sweeps, "Max mesh sweeps")
      ->capture_default_str();
  fair_cmd->add_option("--trust", fair.config.trust_fraction,
                       "Trust radius as a fraction of the mean incident edge")
      ->capture_default_str();
  fair_cmd->add_option("--seed", fair.seed, "Recorded in the trace header")
      ->capture_default_str();

  SynthRequest synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic cube scene");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.options.seed)->capture_default_str();
  synth_cmd->add_option("--views", synth.options.n_views)->capture_default_str();
  synth_cmd->add_option("--image-size", synth.options.image_size)->capture_default_str();
  synth_cmd->add_option("--perturb", synth.perturb,
                        "VERTEX:mag or VERTEX:dx,dy,dz (VERTEX is A or an index)");

  ReportRequest report;
  std::string truth;
  auto* report_cmd = app.add_subcommand("report", "Turn a trace into plot-ready TSV series");
  report_cmd->add_option("--trace", report.trace, "Trace CSV")->required();
  report_cmd->add_option("--truth", truth, "Ground-truth OBJ for position errors");
  report_cmd->add_option("--out", report.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*fair_cmd) {
    if (!dump_dir.empty()) fair.dump_dir = dump_dir;
    return cmd_fair(fair, out, err);
  }
  if (*synth_cmd) return cmd_synth(synth, out, err);
  if (!truth.empty()) report.truth = truth;
  return cmd_report(report, out, err);
}

}  // namespace texfair
