#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "texfair/fairing.hpp"
#include "texfair/geometry.hpp"
#include "texfair/image.hpp"

namespace texfair {

namespace fs = std::filesystem;

/// Writes via a temporary sibling file and rename, so readers never see a
/// partial file.
void write_file_atomic(const fs::path& path, const std::string& content);
std::string read_file(const fs::path& path);

// Wavefront OBJ subset: `v x y z` and `f i j k` (1-based). Other records are
// ignored; `f` entries may carry /vt/vn suffixes.
TriMesh parse_obj(const std::string& text, const std::string& source = "<obj>");
std::string format_obj(const TriMesh& mesh);
TriMesh read_obj(const fs::path& path);
void write_obj(const fs::path& path, const TriMesh& mesh);

// Camera file: one 3x4 projection matrix per line, 12 numbers, row-major.
// Blank lines and lines starting with '#' are skipped.
std::vector<Mat34> parse_cameras(const std::string& text, const std::string& source = "<cams>");
std::string format_cameras(const std::vector<Mat34>& cameras);
std::vector<Mat34> read_cameras(const fs::path& path);
void write_cameras(const fs::path& path, const std::vector<Mat34>& cameras);

// Binary PGM (P5), 8 or 16 bit. Intensities map to [0,1].
GrayImage parse_pgm(const std::string& bytes, const std::string& source = "<pgm>");
std::string format_pgm(const GrayImage& image, int maxval = 65535);
GrayImage read_pgm(const fs::path& path);
void write_pgm(const fs::path& path, const GrayImage& image, int maxval = 65535);

/// Image files of a directory in lexicographic name order (.pgm only).
std::vector<fs::path> list_images(const fs::path& dir);

// Trace CSV: `# key=value` header lines, then the column line
//   sweep,vertex,level,iter,x,y,z,step_norm,E,sigma,backtracks,E0
// where E0 is the objective at the start of the iteration (same frozen
// basis and sigma as E).
using TraceHeader = std::vector<std::pair<std::string, std::string>>;

struct TraceTable {
  std::map<std::string, std::string> header;
  std::vector<TraceRow> rows;
};

std::string format_trace_csv(const FairingTrace& trace, const TraceHeader& header);
void write_trace_csv(const fs::path& path, const FairingTrace& trace, const TraceHeader& header);
TraceTable parse_trace_csv(const std::string& text, const std::string& source = "<trace>");
TraceTable read_trace_csv(const fs::path& path);

/// Tab-separated table with one header row.
std::string format_tsv(const std::vector<std::string>& columns,
                       const std::vector<std::vector<double>>& rows);

}  // namespace texfair
