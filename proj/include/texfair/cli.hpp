#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "texfair/fairing.hpp"
#include "texfair/synth.hpp"

namespace texfair {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;  // bad flags or inconsistent inputs
inline constexpr int kExitIo = 3;

struct RunManifest {
  std::filesystem::path mesh;
  std::filesystem::path cameras;
  std::filesystem::path images;
  std::filesystem::path out;
  std::filesystem::path trace;
  std::optional<std::filesystem::path> dump_dir;
  FairingConfig config;
  std::uint64_t seed = 1;
};

struct SynthRequest {
  std::filesystem::path out_dir;
  SynthOptions options;
  /// "VERTEX:mag" (seeded direction) or "VERTEX:dx,dy,dz"; VERTEX is "A" or
  /// a 0-based index.
  std::vector<std::string> perturb;
};

struct ReportRequest {
  std::filesystem::path trace;
  std::optional<std::filesystem::path> truth;
  std::filesystem::path out_dir;
};

int cmd_fair(const RunManifest& manifest, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthRequest& request, std::ostream& out, std::ostream& err);
int cmd_report(const ReportRequest& request, std::ostream& out, std::ostream& err);

/// Parses `argv` (subcommands fair, synth, report) and dispatches.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Offset for one --perturb entry; throws InvalidInput on bad syntax.
std::pair<int, Vec3> parse_perturbation(const std::string& spec, std::uint64_t seed,
                                        int vertex_count);

}  // namespace texfair
