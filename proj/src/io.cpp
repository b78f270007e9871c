#include "texfair/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "texfair/error.hpp"

namespace texfair {

namespace {

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
  std::string msg = source;
  if (line > 0) msg += ":" + std::to_string(line);
  throw Error(ErrorCode::Io, msg + ": " + what);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_char(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

bool to_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

bool to_int(std::string_view s, int& out) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
  std::size_t start = 0;
  int line_no = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    fn(std::string_view(text).substr(start, end - start), line_no);
    if (end == text.size()) break;
    start = end + 1;
  }
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  std::error_code mk;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), mk);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(tmp.string(), 0, "cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) fail(tmp.string(), 0, "write failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(path.string(), 0, "rename failed");
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path.string(), 0, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- OBJ ----

TriMesh parse_obj(const std::string& text, const std::string& source) {
  TriMesh mesh;
  for_each_line(text, [&](std::string_view line, int no) {
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0].front() == '#') return;
    if (tok[0] == "v") {
      if (tok.size() < 4) fail(source, no, "vertex needs 3 coordinates");
      Vec3 v;
      for (int a = 0; a < 3; ++a) {
        if (!to_double(tok[1 + a], v[a])) fail(source, no, "bad vertex coordinate");
      }
      mesh.vertices.push_back(v);
    } else if (tok[0] == "f") {
      if (tok.size() != 4) fail(source, no, "only triangular faces are supported");
      Face f;
      for (int a = 0; a < 3; ++a) {
        const std::string_view idx = tok[1 + a].substr(0, tok[1 + a].find('/'));
        int i = 0;
        if (!to_int(idx, i) || i == 0) fail(source, no, "bad face index");
        // Negative indices are relative to the vertices read so far.
        f[a] = i > 0 ? i - 1 : static_cast<int>(mesh.vertices.size()) + i;
      }
      mesh.faces.push_back(f);
    }
  });
  try {
    mesh.validate();
  } catch (const Error& e) {
    fail(source, 0, e.what());
  }
  return mesh;
}

std::string format_obj(const TriMesh& mesh) {
  std::string out;
  for (const Vec3& v : mesh.vertices) {
    out += "v " + fmt(v.x()) + " " + fmt(v.y()) + " " + fmt(v.z()) + "\n";
  }
  for (const Face& f : mesh.faces) {
    out += "f " + std::to_string(f[0] + 1) + " " + std::to_string(f[1] + 1) + " " +
           std::to_string(f[2] + 1) + "\n";
  }
  return out;
}

TriMesh read_obj(const fs::path& path) { return parse_obj(read_file(path), path.string()); }

void write_obj(const fs::path& path, const TriMesh& mesh) {
  write_file_atomic(path, format_obj(mesh));
}

// ---- cameras ----

std::vector<Mat34> parse_cameras(const std::string& text, const std::string& source) {
  std::vector<Mat34> cams;
  for_each_line(text, [&](std::string_view line, int no) {
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0].front() == '#') return;
    if (tok.size() != 12) {
      fail(source, no, "expected 12 numbers, got " + std::to_string(tok.size()));
    }
    Mat34 P;
    for (int i = 0; i < 12; ++i) {
      if (!to_double(tok[i], P(i / 4, i % 4))) fail(source, no, "bad number");
    }
    cams.push_back(P);
  });
  return cams;
}

std::string format_cameras(const std::vector<Mat34>& cameras) {
  std::string out;
  for (const Mat34& P : cameras) {
    for (int i = 0; i < 12; ++i) {
      out += fmt(P(i / 4, i % 4));
      out += i == 11 ? "\n" : " ";
    }
  }
  return out;
}

std::vector<Mat34> read_cameras(const fs::path& path) {
  return parse_cameras(read_file(path), path.string());
}

void write_cameras(const fs::path& path, const std::vector<Mat34>& cameras) {
  write_file_atomic(path, format_cameras(cameras));
}

// ---- PGM ----

GrayImage parse_pgm(const std::string& bytes, const std::string& source) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* what) {
    skip_space();
    std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
    int v = 0;
    if (start == pos || !to_int(std::string_view(bytes).substr(start, pos - start), v) || v <= 0) {
      fail(source, 0, std::string("bad PGM ") + what);
    }
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') fail(source, 0, "not a binary PGM (P5)");
  pos = 2;
  const int width = read_uint("width");
  const int height = read_uint("height");
  const int maxval = read_uint("maxval");
  if (maxval > 65535) fail(source, 0, "maxval above 65535");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    fail(source, 0, "missing separator after header");
  }
  ++pos;
  const int bpp = maxval < 256 ? 1 : 2;
  const std::size_t need = static_cast<std::size_t>(width) * height * bpp;
  if (bytes.size() - pos < need) fail(source, 0, "truncated pixel data");

  GrayImage image(width, height);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      const int v = bpp == 1 ? data[i] : (data[2 * i] << 8) | data[2 * i + 1];
      image.at(x, y) = static_cast<double>(v) / maxval;
    }
  }
  return image;
}

std::string format_pgm(const GrayImage& image, int maxval) {
  if (maxval < 1 || maxval > 65535) throw Error(ErrorCode::InvalidInput, "PGM maxval out of range");
  std::string out = "P5\n" + std::to_string(image.width()) + " " +
                    std::to_string(image.height()) + "\n" + std::to_string(maxval) + "\n";
  const int bpp = maxval < 256 ? 1 : 2;
  out.reserve(out.size() + static_cast<std::size_t>(image.width()) * image.height() * bpp);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const double v = std::clamp(image.at(x, y), 0.0, 1.0);
      const int q = static_cast<int>(std::lround(v * maxval));
      if (bpp == 2) out.push_back(static_cast<char>(q >> 8));
      out.push_back(static_cast<char>(q & 0xff));
    }
  }
  return out;
}

GrayImage read_pgm(const fs::path& path) { return parse_pgm(read_file(path), path.string()); }

void write_pgm(const fs::path& path, const GrayImage& image, int maxval) {
  write_file_atomic(path, format_pgm(image, maxval));
}

std::vector<fs::path> list_images(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) fail(dir.string(), 0, "not a directory");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---- trace ----

namespace {
constexpr const char* kTraceColumns = "sweep,vertex,level,iter,x,y,z,step_norm,E,sigma,backtracks,E0";
}

std::string format_trace_csv(const FairingTrace& trace, const TraceHeader& header) {
  std::string out;
  for (const auto& [key, value] : header) out += "# " + key + "=" + value + "\n";
  out += kTraceColumns;
  out += "\n";
  for (const TraceRow& r : trace.rows) {
    out += std::to_string(r.sweep) + "," + std::to_string(r.vertex) + "," +
           std::to_string(r.level) + "," + std::to_string(r.iter) + "," + fmt(r.position.x()) +
           "," + fmt(r.position.y()) + "," + fmt(r.position.z()) + "," + fmt(r.step_norm) + "," +
           fmt(r.energy) + "," + fmt(r.sigma) + "," + std::to_string(r.backtracks) + "," +
           fmt(r.energy_before) + "\n";
  }
  return out;
}

void write_trace_csv(const fs::path& path, const FairingTrace& trace, const TraceHeader& header) {
  write_file_atomic(path, format_trace_csv(trace, header));
}

TraceTable parse_trace_csv(const std::string& text, const std::string& source) {
  TraceTable table;
  bool have_columns = false;
  for_each_line(text, [&](std::string_view line, int no) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) return;
    if (line.front() == '#') {
      line.remove_prefix(1);
      while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
      const std::size_t eq = line.find('=');
      if (eq != std::string_view::npos) {
        table.header[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
      }
      return;
    }
    if (!have_columns) {
      if (line != kTraceColumns) fail(source, no, "unexpected column line");
      have_columns = true;
      return;
    }
    const auto f = split_char(line, ',');
    if (f.size() != 12) fail(source, no, "expected 12 fields, got " + std::to_string(f.size()));
    TraceRow r;
    double x = 0, y = 0, z = 0;
    const bool ok = to_int(f[0], r.sweep) && to_int(f[1], r.vertex) && to_int(f[2], r.level) &&
                    to_int(f[3], r.iter) && to_double(f[4], x) && to_double(f[5], y) &&
                    to_double(f[6], z) && to_double(f[7], r.step_norm) &&
                    to_double(f[8], r.energy) && to_double(f[9], r.sigma) &&
                    to_int(f[10], r.backtracks) && to_double(f[11], r.energy_before);
    if (!ok) fail(source, no, "malformed field");
    r.position = Vec3(x, y, z);
    table.rows.push_back(r);
  });
  if (!have_columns) fail(source, 0, "missing column line");
  return table;
}

TraceTable read_trace_csv(const fs::path& path) {
  return parse_trace_csv(read_file(path), path.string());
}

std::string format_tsv(const std::vector<std::string>& columns,
                       const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out += columns[i];
    out += i + 1 == columns.size() ? "\n" : "\t";
  }
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out += fmt(row[i]);
      out += i + 1 == row.size() ? "\n" : "\t";
    }
  }
  return out;
}

}  // namespace texfair
