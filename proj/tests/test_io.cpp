#include <doctest.h>

#include <random>

#include "support.hpp"
#include "texfair/error.hpp"
#include "texfair/io.hpp"

using namespace texfair;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("texfair_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string io_message(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
    return e.what();
  }
  FAIL("expected an I/O error");
  return {};
}

}  // namespace

TEST_CASE("OBJ round trip keeps vertices to 1e-9") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  TriMesh m;
  for (int i = 0; i < 200; ++i) m.vertices.emplace_back(u(rng), u(rng) * 1e-4, u(rng) * 1e-7);
  for (int i = 0; i + 2 < 200; i += 3) m.faces.push_back({i, i + 1, i + 2});
  const TriMesh back = parse_obj(format_obj(m));
  REQUIRE(back.vertices.size() == m.vertices.size());
  CHECK(back.faces == m.faces);
  double worst = 0.0;
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    worst = std::max(worst, ((back.vertices[i] - m.vertices[i]).array() / m.vertices[i].array().abs().max(1.0)).abs().maxCoeff());
  }
  CHECK(worst < 1e-9);

  const TriMesh& cube = testing::cube().true_mesh;
  const fs::path dir = scratch_dir("obj");
  write_obj(dir / "cube.obj", cube);
  const TriMesh c = read_obj(dir / "cube.obj");
  CHECK(c.vertices == cube.vertices);
  CHECK(c.faces == cube.faces);
}

TEST_CASE("OBJ subset parsing") {
  const TriMesh m = parse_obj(
      "# comment\n"
      "o thing\n"
      "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n"
      "vn 0 0 1\n"
      "vt 0.5 0.5\n"
      "f 1/1/1 2/1/1 3/1/1\n"
      "f -4 -3 -1\n");
  CHECK(m.vertices.size() == 4);
  REQUIRE(m.faces.size() == 2);
  CHECK(m.faces[0] == Face{0, 1, 2});
  CHECK(m.faces[1] == Face{0, 1, 3});

  CHECK(io_message([] { parse_obj("v 0 0 0\nv 1 0\n", "m.obj"); }).find("m.obj:2") != std::string::npos);
  CHECK(io_message([] { parse_obj("v 0 0 0\nf 1 2 3 4\n", "q.obj"); }).find("q.obj:2") != std::string::npos);
  CHECK(io_message([] { parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 x\n"); }).find("bad face index") != std::string::npos);
  // Indices beyond the vertex list fail mesh validation.
  CHECK_THROWS_AS(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n"), Error);
}

TEST_CASE("camera file") {
  std::vector<Mat34> cams;
  for (const CameraView& v : testing::cube().views) cams.push_back(v.P);
  const std::vector<Mat34> back = parse_cameras("# header\n\n" + format_cameras(cams));
  REQUIRE(back.size() == cams.size());
  for (std::size_t i = 0; i < cams.size(); ++i) {
    CHECK(((back[i] - cams[i]).array().abs() / cams[i].array().abs().max(1.0)).maxCoeff() < 1e-11);
  }
  CHECK(io_message([] { parse_cameras("1 2 3\n", "c.txt"); }).find("c.txt:1") != std::string::npos);
  CHECK(io_message([] { parse_cameras("1 2 3 4 5 6 7 8 9 10 11 zz\n"); }).find("bad number") != std::string::npos);
}

TEST_CASE("PGM round trip") {
  GrayImage img(17, 9);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : img.pixels()) v = u(rng);

  const GrayImage deep = parse_pgm(format_pgm(img));
  REQUIRE(deep.width() == 17);
  REQUIRE(deep.height() == 9);
  for (std::size_t i = 0; i < img.pixels().size(); ++i) CHECK(std::abs(deep.pixels()[i] - img.pixels()[i]) <= 0.5 / 65535 + 1e-15);

  const GrayImage shallow = parse_pgm(format_pgm(img, 255));
  for (std::size_t i = 0; i < img.pixels().size(); ++i) CHECK(std::abs(shallow.pixels()[i] - img.pixels()[i]) <= 0.5 / 255 + 1e-15);

  // Header comments are allowed.
  const std::string raw = std::string("P5\n# made by hand\n2 1\n255\n") + char(0) + char(255);
  const GrayImage tiny = parse_pgm(raw);
  CHECK(tiny.at(0, 0) == 0.0);
  CHECK(tiny.at(1, 0) == 1.0);

  CHECK(io_message([] { parse_pgm("P2\n1 1\n255\n0"); }).find("P5") != std::string::npos);
  CHECK(io_message([&] { parse_pgm(raw.substr(0, raw.size() - 1)); }).find("truncated") != std::string::npos);
}

TEST_CASE("image listing is sorted and filtered") {
  const fs::path dir = scratch_dir("list");
  const GrayImage img(4, 4, 0.5);
  for (const char* name : {"b.pgm", "a.pgm", "c.PGM"}) write_pgm(dir / name, img);
  write_file_atomic(dir / "notes.txt", "x");
  const std::vector<fs::path> files = list_images(dir);
  REQUIRE(files.size() == 3);
  CHECK(files[0].filename() == "a.pgm");
  CHECK(files[1].filename() == "b.pgm");
  CHECK(files[2].filename() == "c.PGM");
  CHECK_THROWS_AS(list_images(dir / "missing"), Error);
  CHECK_THROWS_AS(read_file(dir / "missing.obj"), Error);
}

TEST_CASE("trace CSV round trip") {
  FairingTrace t;
  for (int i = 0; i < 5; ++i) {
    TraceRow r;
    r.sweep = i / 3;
    r.vertex = i % 2;
    r.level = i;
    r.iter = 2 * i;
    r.position = Vec3(1.0 / (i + 1), -0.25 * i, 3.0);
    r.step_norm = 1e-4 * i;
    r.energy = 100.0 - i;
    r.energy_before = 100.5 - i;
    r.sigma = 0.01 * (i + 1);
    r.backtracks = i % 3;
    t.rows.push_back(r);
  }
  const std::string csv = format_trace_csv(t, {{"k", "5"}, {"cell_size", "64"}});
  const TraceTable back = parse_trace_csv(csv);
  CHECK(back.header.at("k") == "5");
  CHECK(back.header.at("cell_size") == "64");
  REQUIRE(back.rows.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(back.rows[i].sweep == t.rows[i].sweep);
    CHECK(back.rows[i].vertex == t.rows[i].vertex);
    CHECK(back.rows[i].level == t.rows[i].level);
    CHECK(back.rows[i].iter == t.rows[i].iter);
    CHECK((back.rows[i].position - t.rows[i].position).norm() < 1e-11);
    CHECK(back.rows[i].energy == doctest::Approx(t.rows[i].energy).epsilon(1e-11));
    CHECK(back.rows[i].energy_before == doctest::Approx(t.rows[i].energy_before).epsilon(1e-11));
    CHECK(back.rows[i].backtracks == t.rows[i].backtracks);
  }
  CHECK(io_message([] { parse_trace_csv("a,b\n", "t.csv"); }).find("t.csv:1") != std::string::npos);
  CHECK(io_message([&] { parse_trace_csv(csv + "1,2,3\n", "t.csv"); }).find("expected 12 fields") != std::string::npos);
  CHECK_THROWS_AS(parse_trace_csv("# only=header\n"), Error);
}

TEST_CASE("TSV formatting") {
  CHECK(format_tsv({"a", "b"}, {{1.0, 0.5}, {2.0, 1e-7}}) == "a\tb\n1\t0.5\n2\t1e-07\n");
}

TEST_CASE("atomic writes leave no temporary files") {
  const fs::path dir = scratch_dir("atomic");
  write_file_atomic(dir / "x.txt", "one");
  write_file_atomic(dir / "x.txt", "two");
  CHECK(read_file(dir / "x.txt") == "two");
  int count = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++count;
  CHECK(count == 1);

  write_file_atomic(dir / "deep" / "er" / "y.txt", "three");
  CHECK(read_file(dir / "deep" / "er" / "y.txt") == "three");
}
