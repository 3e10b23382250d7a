#pragma once

// Subcommands of the hapod executable. Each command function takes parsed
// options, writes its artifacts, and reports through the given streams;
// run_cli() adds argument parsing and maps exceptions to exit codes.

#include "hapod/datagen.hpp"
#include "hapod/pod.hpp"
#include "hapod/tolerance.hpp"
#include "hapod/tree.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hapod::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,         // bad arguments, unreadable or invalid input
  kExitVerifyFailed = 2,  // a verification check did not hold
  kExitNumerical = 3,     // numerical failure (blow-up, LAPACK error, overflow)
};

struct GenBurgersOptions {
  BurgersConfig config;
  fs::path output;
  bool force = false;
};

struct GenSyntheticOptions {
  Index rows = 50;
  Index cols = 40;
  double decay = 0.5;
  std::uint64_t seed = 0;
  fs::path output;
  bool force = false;
};

/// Writes the matrix and a `<output>.meta` key=value sidecar.
void cmd_gen_burgers(const GenBurgersOptions& opt, std::ostream& log);
void cmd_gen_synthetic(const GenSyntheticOptions& opt, std::ostream& log);

struct RunOptions {
  fs::path input;
  fs::path output_dir;
  std::string topology = "star";  // single | star | chain | balanced | balanced:<depth> | file:<path>
  std::size_t blocks = 10;
  std::size_t block_size = 0;     // overrides blocks when nonzero
  std::vector<std::size_t> split; // explicit leaf sizes, overrides both
  std::size_t depth = 3;          // balanced trees only
  double eps_star = 0.0;
  double omega = 0.75;
  std::string leaf_policy;        // theorem | zero; empty picks zero for chain, theorem otherwise
  std::size_t workers = 1;
  PodMethod backend = PodMethod::MethodOfSnapshots;
  bool track_right_factor = false;
  std::uint64_t seed = 0;         // recorded only; the run itself draws no random numbers
  bool force = false;
};

struct RunSummary {
  std::size_t snapshot_count = 0;
  std::size_t root_modes = 0;
  std::size_t max_intermediate_modes = 0;
  double apriori_error_bound = 0.0;
  double measured_mean_error = 0.0;
  double total_time = 0.0;
};

/// Output files in opt.output_dir: modes.hpd, sigmas.txt, report.tsv,
/// summary.txt, manifest.toml, tree.txt, leaves.tsv (and right_factor.hpd).
RunSummary cmd_run(const RunOptions& opt, std::ostream& log);

struct VerifyOptions {
  fs::path results;
  fs::path input;  // defaults to the input recorded in the manifest
  double entry_cap = 5e7;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Recomputes a direct dense POD and checks the run's artifacts against it.
/// Throws ParameterError when rows * cols exceeds the entry cap.
std::vector<CheckResult> cmd_verify(const VerifyOptions& opt, std::ostream& log);

struct BenchOptions {
  std::vector<std::size_t> sizes{1000, 2000, 4000};
  Index rows = 500;
  double decay = 0.05;
  double eps_star = 1e-3;
  double omega = 0.75;
  std::vector<std::string> topologies{"pod", "star", "chain", "balanced:3"};
  std::size_t block_size = 100;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  PodMethod backend = PodMethod::MethodOfSnapshots;
};

/// Tab-separated timing table, one row per (size, topology).
void cmd_bench(const BenchOptions& opt, std::ostream& table, std::ostream& log);

/// Tree for a topology string over the given number of leaves.
RootedTree make_topology(const std::string& topology, std::size_t leaves, std::size_t depth);

/// Entry point: parses argv and dispatches; never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hapod::cli
