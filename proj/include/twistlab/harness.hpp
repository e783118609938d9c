// Experiment commands: each loads the surface named by the configuration,
// runs one module operation and writes CSV/JSON results into the output
// directory. Exit codes: 0 success, 2 partial failure, 1 fatal error.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "twistlab/config.hpp"
#include "twistlab/grid.hpp"
#include "twistlab/origami.hpp"
#include "twistlab/output.hpp"
#include "twistlab/spectral.hpp"

namespace twistlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

struct RunOptions {
  std::string out_dir;  // empty means [output] dir
  int threads = 1;
  bool verbose = false;
  std::ostream* log = nullptr;  // defaults to std::cerr
};

const std::vector<std::string>& command_names();

// Runs a command by name and maps errors to exit codes, logging the message.
int run_command(const std::string& name, const ExperimentConfig& cfg, const RunOptions& opt);

// Loaded surface, grid and first-order operators of a run.
struct RunContext {
  RunContext(const ExperimentConfig& config, const RunOptions& options);

  ExperimentConfig cfg;
  RunOptions opt;
  std::string out_dir;
  std::string surface_hash;  // CRC-64 of the surface file bytes
  Origami origami;
  Grid grid;
  SparseOperator S, T;

  Provenance provenance(const std::string& command) const;
  std::string output(const std::string& file) const;  // path inside out_dir
  std::ostream& log() const;
  void info(const std::string& msg) const;  // only with verbose
};

// Right-hand side described by the [field] section, sampled on g.
GridField make_field(const ExperimentConfig& cfg, const Grid& g);

// Eigenbasis from the cache when a valid entry exists, otherwise computed
// and stored. A corrupt entry is reported and recomputed.
EigenBasis cached_eigenbasis(const RunContext& ctx);
std::string cache_path(const RunContext& ctx);

int cmd_spectrum(const RunContext& ctx);
int cmd_weyl(const RunContext& ctx);
int cmd_solve(const RunContext& ctx);
int cmd_scan(const RunContext& ctx);
int cmd_invariants(const RunContext& ctx);
int cmd_beurling(const RunContext& ctx);
int cmd_product(const RunContext& ctx);
int cmd_timetau(const RunContext& ctx);

}  // namespace twistlab
