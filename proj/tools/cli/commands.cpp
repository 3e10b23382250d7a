#include "commands.hpp"

#include "hapod/error.hpp"
#include "hapod/exec.hpp"
#include "hapod/hapod.hpp"
#include "hapod/incremental.hpp"
#include "hapod/linalg.hpp"
#include "hapod/matrix_io.hpp"
#include "hapod/tree_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace hapod::cli {
namespace {

using Clock = std::chrono::steady_clock;

constexpr Index kStreamChunk = 512;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << text;
  out.close();
  if (!out) throw IoError(path.string() + ": write failed");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// `key = value` lines; '#' starts a comment, values may be double-quoted.
std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::map<std::string, std::string> out;
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    out[key] = value;
  }
  return out;
}

const std::string& require_key(const std::map<std::string, std::string>& kv, const std::string& key,
                               const fs::path& file) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw InputError(file.string() + ": missing key '" + key + "'");
  return it->second;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError(what + ": '" + s + "' is not a number");
  }
}

std::size_t parse_size(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw InputError(what + ": '" + s + "' is not a nonnegative integer");
  }
}

void refuse_overwrite(const fs::path& path, bool force) {
  if (!force && fs::exists(path)) {
    throw ParameterError(path.string() + " already exists; pass --force to overwrite");
  }
}

std::string backend_name(PodMethod m) { return m == PodMethod::DirectSvd ? "svd" : "gram"; }

PodMethod parse_backend(const std::string& s) {
  if (s == "gram") return PodMethod::MethodOfSnapshots;
  if (s == "svd") return PodMethod::DirectSvd;
  throw ParameterError("unknown backend '" + s + "' (expected gram or svd)");
}

LeafPolicy parse_leaf_policy(const std::string& s) {
  if (s == "theorem") return LeafPolicy::Theorem;
  if (s == "zero") return LeafPolicy::Zero;
  throw ParameterError("unknown leaf policy '" + s + "' (expected theorem or zero)");
}

bool is_chain(const std::string& topology) { return topology == "chain"; }

std::vector<std::size_t> leaf_sizes(const RunOptions& opt, std::size_t total, std::optional<std::size_t> fixed_leaves) {
  std::vector<std::size_t> sizes;
  if (!opt.split.empty()) {
    sizes = opt.split;
    if (std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) != total) {
      throw ParameterError("--split sizes do not add up to the " + std::to_string(total) + " input columns");
    }
  } else if (opt.block_size > 0) {
    for (std::size_t first = 0; first < total; first += opt.block_size) {
      sizes.push_back(std::min(opt.block_size, total - first));
    }
  } else {
    const std::size_t leaves = fixed_leaves.value_or(opt.blocks);
    if (leaves < 1) throw ParameterError("need at least one block");
    if (leaves > total) {
      throw ParameterError(std::to_string(leaves) + " blocks requested for only " + std::to_string(total) + " columns");
    }
    sizes.assign(leaves, total / leaves);
    for (std::size_t i = 0; i < total % leaves; ++i) ++sizes[i];
  }
  if (fixed_leaves && sizes.size() != *fixed_leaves) {
    throw ParameterError("topology has " + std::to_string(*fixed_leaves) + " leaves but the split has " +
                         std::to_string(sizes.size()) + " blocks");
  }
  return sizes;
}

std::string format_sigmas(const Vector& sigmas) {
  std::string out;
  for (Index k = 0; k < sigmas.size(); ++k) out += num(sigmas[k]) + "\n";
  return out;
}

Vector parse_sigmas(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    values.push_back(parse_double(line.substr(0, line.find_last_not_of(" \t\r") + 1),
                                  path.string() + " line " + std::to_string(line_no)));
  }
  return Eigen::Map<Vector>(values.data(), static_cast<Index>(values.size()));
}

struct LeafRange {
  NodeId leaf;
  Index first;
  Index count;
};

std::vector<LeafRange> parse_leaves(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<LeafRange> out;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream f(line);
    unsigned long long leaf = 0;
    long long first = 0, count = 0;
    if (!(f >> leaf >> first >> count) || first < 0 || count < 0) {
      throw InputError(path.string() + ": malformed line '" + line + "'");
    }
    out.push_back({static_cast<NodeId>(leaf), static_cast<Index>(first), static_cast<Index>(count)});
  }
  return out;
}

// Streams the input once more and accumulates the projection error.
double streamed_mean_error(const fs::path& input, const ModeSet& modes) {
  ProjectionErrorAccumulator acc(modes);
  if (input.extension() == ".csv") {
    acc.add(io::read_csv(input));
  } else {
    io::MatrixReader reader(input);
    if (!(reader.space() == modes.space)) throw InputError(input.string() + ": space differs from the modes");
    while (reader.remaining() > 0) acc.add(reader.read_columns(kStreamChunk));
  }
  return acc.mean();
}

struct TreeRun {
  RootedTree tree;
  HapodResult result;
  std::vector<LeafRange> ranges;  // depth-first leaf order
  std::size_t peak_resident = 0;
  double critical_path = 0.0;
  double sequential = 0.0;
};

TreeRun run_streaming_chain(const RunOptions& opt, const std::vector<std::size_t>& sizes) {
  const std::size_t blocks = sizes.size();
  IncrementalSession session(opt.eps_star, opt.omega, blocks, PodBackend{opt.backend});
  std::optional<io::MatrixReader> reader;
  std::optional<SnapshotBlock> csv;
  if (opt.input.extension() == ".csv") {
    csv = io::read_csv(opt.input);
  } else {
    reader.emplace(opt.input);
  }
  TreeRun run{build_chain(blocks), {ModeSet(InnerProductSpace(1)), 0.0, {}, std::nullopt}, {}, 0, 0.0, 0.0};
  Index first = 0;
  for (std::size_t l = 1; l <= blocks; ++l) {
    const auto n = static_cast<Index>(sizes[l - 1]);
    const SnapshotBlock block = csv ? csv->columns(first, n) : reader->read_columns(static_cast<std::uint64_t>(n));
    const std::size_t held = (session.current() ? static_cast<std::size_t>(session.current()->size()) : 0) +
                             static_cast<std::size_t>(block.count());
    run.peak_resident = std::max(run.peak_resident, held);
    session.push(block);
    const NodeId leaf = l == 1 ? chain_alpha(blocks, 1) : chain_beta(blocks, l - 1);
    run.ranges.push_back({leaf, first, n});
    first += n;
  }
  run.result = session.finalize();
  for (const NodeReport& r : run.result.reports) {
    run.sequential += r.wall_time;
    run.critical_path += r.wall_time;  // a chain has no parallelism
  }
  return run;
}

TreeRun run_tree(const RunOptions& opt, LeafPolicy policy) {
  const SnapshotBlock all = io::load_snapshots(opt.input);
  const auto total = static_cast<std::size_t>(all.count());
  RootedTree tree = [&] {
    if (opt.topology.rfind("file:", 0) == 0) return make_topology(opt.topology, 0, opt.depth);
    const std::size_t leaves = leaf_sizes(opt, total, std::nullopt).size();
    return make_topology(opt.topology, leaves, opt.depth);
  }();
  const TreeMaps maps = derive_maps(tree);
  const std::vector<std::size_t> sizes = leaf_sizes(opt, total, maps.leaf_order.size());
  const LeafAssignment leaves = LeafAssignment::split(tree, all, sizes);
  const ToleranceAssignment tol =
      assign_tolerances(tree, leaves.counts(tree.node_count()), opt.eps_star, opt.omega, policy);
  auto [result, stats] = run_parallel(tree, leaves, tol, PodBackend{opt.backend}, opt.workers, opt.track_right_factor);

  TreeRun run{std::move(tree), std::move(result), {}, stats.peak_resident_modes, stats.critical_path_time,
              stats.sequential_time};
  Index first = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    run.ranges.push_back({maps.leaf_order[i], first, static_cast<Index>(sizes[i])});
    first += static_cast<Index>(sizes[i]);
  }
  return run;
}

std::string manifest_text(const RunOptions& opt, const std::string& policy) {
  std::ostringstream m;
  m << "# reuse with: hapod run --manifest <this file> --out <dir>\n[run]\n";
  m << "input = \"" << fs::absolute(opt.input).generic_string() << "\"\n";
  m << "topology = \"" << opt.topology << "\"\n";
  if (!opt.split.empty()) {
    m << "split = [";
    for (std::size_t i = 0; i < opt.split.size(); ++i) m << (i ? ", " : "") << opt.split[i];
    m << "]\n";
  } else if (opt.block_size > 0) {
    m << "block-size = " << opt.block_size << "\n";
  } else {
    m << "blocks = " << opt.blocks << "\n";
  }
  m << "depth = " << opt.depth << "\n";
  m << "eps-star = " << num(opt.eps_star) << "\n";
  m << "omega = " << num(opt.omega) << "\n";
  m << "leaf-policy = \"" << policy << "\"\n";
  m << "workers = " << opt.workers << "\n";
  m << "backend = \"" << backend_name(opt.backend) << "\"\n";
  m << "track-right-factor = " << (opt.track_right_factor ? "true" : "false") << "\n";
  m << "seed = " << opt.seed << "\n";
  return m.str();
}

}  // namespace

RootedTree make_topology(const std::string& topology, std::size_t leaves, std::size_t depth) {
  if (topology == "single") return RootedTree({{}}, 0);
  if (topology == "star") return build_star(leaves);
  if (topology == "chain") return build_chain(leaves);
  if (topology == "balanced") return build_balanced(leaves, depth);
  if (topology.rfind("balanced:", 0) == 0) {
    return build_balanced(leaves, parse_size(topology.substr(9), "balanced depth"));
  }
  if (topology.rfind("file:", 0) == 0) return io::read_tree(topology.substr(5));
  throw ParameterError("unknown topology '" + topology +
                       "' (expected single, star, chain, balanced, balanced:<depth> or file:<path>)");
}

void cmd_gen_burgers(const GenBurgersOptions& opt, std::ostream& log) {
  const fs::path meta = opt.output.string() + ".meta";
  refuse_overwrite(opt.output, opt.force);
  refuse_overwrite(meta, opt.force);
  const auto start = Clock::now();
  const BurgersTrajectory t = burgers_snapshots(opt.config);
  io::write_matrix(opt.output, t.snapshots);
  const BurgersConfig& c = opt.config;
  std::ostringstream m;
  m << "generator=burgers\nseed=" << c.seed << "\ngrid_size=" << c.grid_size << "\nstep_count=" << c.step_count
    << "\ntime_step=" << num(c.time_step) << "\nspark_probability=" << num(c.spark_probability)
    << "\nspark_max=" << num(c.spark_max) << "\nspark_count=" << t.spark_count << "\nrows=" << t.snapshots.dim()
    << "\ncols=" << t.snapshots.count() << "\n";
  write_text(meta, m.str());
  log << "wrote " << opt.output.string() << " (" << t.snapshots.dim() << " x " << t.snapshots.count() << ", "
      << t.spark_count << " sparks) in " << seconds_since(start) << " s\n";
}

void cmd_gen_synthetic(const GenSyntheticOptions& opt, std::ostream& log) {
  const fs::path meta = opt.output.string() + ".meta";
  refuse_overwrite(opt.output, opt.force);
  refuse_overwrite(meta, opt.force);
  const SnapshotBlock block = synthetic_decay(opt.rows, opt.cols, opt.decay, opt.seed);
  io::write_matrix(opt.output, block);
  std::ostringstream m;
  m << "generator=synthetic\nseed=" << opt.seed << "\nrows=" << opt.rows << "\ncols=" << opt.cols
    << "\ndecay=" << num(opt.decay) << "\n";
  write_text(meta, m.str());
  log << "wrote " << opt.output.string() << " (" << opt.rows << " x " << opt.cols << ")\n";
}

RunSummary cmd_run(const RunOptions& opt, std::ostream& log) {
  if (opt.input.empty()) throw ParameterError("run needs --input");
  if (opt.output_dir.empty()) throw ParameterError("run needs --out");
  if (!(opt.eps_star > 0.0)) throw ParameterError("--eps-star must be positive");
  if (opt.workers < 1) throw ParameterError("--workers must be >= 1");
  refuse_overwrite(opt.output_dir / "summary.txt", opt.force);
  const std::string policy_name = !opt.leaf_policy.empty() ? opt.leaf_policy : is_chain(opt.topology) ? "zero" : "theorem";
  const LeafPolicy policy = parse_leaf_policy(policy_name);
  fs::create_directories(opt.output_dir);

  const auto start = Clock::now();
  TreeRun run = [&] {
    if (is_chain(opt.topology) && policy == LeafPolicy::Zero && !opt.track_right_factor) {
      const std::size_t total = opt.input.extension() == ".csv"
                                    ? static_cast<std::size_t>(io::read_csv(opt.input).count())
                                    : static_cast<std::size_t>(io::read_header(opt.input).cols);
      return run_streaming_chain(opt, leaf_sizes(opt, total, std::nullopt));
    }
    return run_tree(opt, policy);
  }();
  const double compute_time = seconds_since(start);
  const HapodResult& r = run.result;
  const TreeMaps maps = derive_maps(run.tree);

  std::size_t total = 0;
  for (const LeafRange& lr : run.ranges) total += static_cast<std::size_t>(lr.count);
  const double mean_error = streamed_mean_error(opt.input, r.modes);

  RunSummary s;
  s.snapshot_count = total;
  s.root_modes = static_cast<std::size_t>(r.modes.size());
  s.apriori_error_bound = r.apriori_error_bound;
  s.measured_mean_error = mean_error;
  for (const NodeReport& rep : r.reports) {
    if (rep.node != run.tree.root() && !run.tree.is_leaf(rep.node)) {
      s.max_intermediate_modes = std::max(s.max_intermediate_modes, rep.output_mode_count);
    }
  }

  const fs::path& dir = opt.output_dir;
  io::write_matrix(dir / "modes.hpd", SnapshotBlock(r.modes.space, r.modes.modes));
  write_text(dir / "sigmas.txt", format_sigmas(r.modes.sigmas));
  if (r.right_factor) {
    io::write_matrix(dir / "right_factor.hpd", SnapshotBlock(InnerProductSpace(std::max<Index>(1, r.right_factor->rows())),
                                                             r.right_factor->rows() > 0 ? *r.right_factor : Matrix(1, 0)));
  }
  write_text(dir / "tree.txt", io::format_tree(run.tree));

  std::ostringstream leaves;
  leaves << "leaf\tfirst\tcount\n";
  for (const LeafRange& lr : run.ranges) leaves << lr.leaf << '\t' << lr.first << '\t' << lr.count << '\n';
  write_text(dir / "leaves.tsv", leaves.str());

  std::vector<NodeReport> reports = r.reports;
  std::sort(reports.begin(), reports.end(), [](const NodeReport& a, const NodeReport& b) { return a.node < b.node; });
  std::ostringstream table;
  table << "node\tparent\tlevel\tleaf\tinput_count\tsubordinate_count\tlocal_epsilon\toutput_modes\t"
           "discarded_tail_energy\twall_time\n";
  for (const NodeReport& rep : reports) {
    const auto parent = maps.parent[rep.node];
    table << rep.node << '\t' << (parent ? std::to_string(*parent) : "-") << '\t' << maps.level[rep.node] << '\t'
          << (run.tree.is_leaf(rep.node) ? 1 : 0) << '\t' << rep.input_count << '\t' << rep.subordinate_count << '\t'
          << num(rep.local_epsilon) << '\t' << rep.output_mode_count << '\t' << num(rep.discarded_tail_energy) << '\t'
          << num(rep.wall_time) << '\n';
  }
  write_text(dir / "report.tsv", table.str());

  s.total_time = seconds_since(start);
  const double sigma_energy = r.modes.sigmas.squaredNorm();
  std::ostringstream sum;
  sum << "input=" << fs::absolute(opt.input).generic_string() << "\nrows=" << r.modes.space.dim()
      << "\ncols=" << total << "\nweighted=" << (r.modes.space.weighted() ? 1 : 0) << "\ntopology=" << opt.topology
      << "\nleaves=" << run.ranges.size() << "\ndepth=" << maps.depth << "\neps_star=" << num(opt.eps_star)
      << "\nomega=" << num(opt.omega) << "\nleaf_policy=" << policy_name << "\nbackend=" << backend_name(opt.backend)
      << "\nworkers=" << opt.workers << "\nseed=" << opt.seed << "\ntarget_mean_error=" << num(opt.eps_star * opt.eps_star)
      << "\napriori_error_bound=" << num(r.apriori_error_bound)
      << "\napriori_mean_error_bound=" << num(r.apriori_error_bound * r.apriori_error_bound / static_cast<double>(total))
      << "\nmeasured_mean_error=" << num(mean_error) << "\nroot_modes=" << s.root_modes
      << "\northonormal=" << (r.modes.orthonormal ? 1 : 0) << "\nmax_intermediate_modes=" << s.max_intermediate_modes
      << "\npeak_resident_modes=" << run.peak_resident << "\nsigma_energy=" << num(sigma_energy)
      << "\ncompute_time=" << num(compute_time) << "\ncritical_path_time=" << num(run.critical_path)
      << "\nsequential_time=" << num(run.sequential) << "\ntotal_time=" << num(s.total_time) << "\n";
  write_text(dir / "summary.txt", sum.str());
  write_text(dir / "manifest.toml", manifest_text(opt, policy_name));

  log << "root modes " << s.root_modes << ", mean error " << mean_error << " (target " << opt.eps_star * opt.eps_star
      << "), a-priori bound " << r.apriori_error_bound << ", " << s.total_time << " s\n";
  return s;
}

std::vector<CheckResult> cmd_verify(const VerifyOptions& opt, std::ostream& log) {
  const fs::path& dir = opt.results;
  const auto manifest = read_key_values(dir / "manifest.toml");
  const auto summary = read_key_values(dir / "summary.txt");
  const fs::path input = opt.input.empty() ? fs::path(require_key(manifest, "input", dir / "manifest.toml")) : opt.input;
  const double eps_star = parse_double(require_key(manifest, "eps-star", dir / "manifest.toml"), "eps-star");
  const double omega = parse_double(require_key(manifest, "omega", dir / "manifest.toml"), "omega");
  const LeafPolicy policy = parse_leaf_policy(require_key(manifest, "leaf-policy", dir / "manifest.toml"));

  std::uint64_t rows = 0, cols = 0;
  if (input.extension() == ".csv") {
    const SnapshotBlock b = io::read_csv(input);
    rows = static_cast<std::uint64_t>(b.dim());
    cols = static_cast<std::uint64_t>(b.count());
  } else {
    const io::MatrixHeader h = io::read_header(input);
    rows = h.rows;
    cols = h.cols;
  }
  const double entries = static_cast<double>(rows) * static_cast<double>(cols);
  if (entries > opt.entry_cap) {
    throw ParameterError("input has " + num(entries) + " entries, above the dense verification cap of " +
                         num(opt.entry_cap) + " (raise it with --cap)");
  }

  const SnapshotBlock all = io::load_snapshots(input);
  const RootedTree tree = io::read_tree(dir / "tree.txt");
  const TreeMaps maps = derive_maps(tree);
  const std::vector<LeafRange> ranges = parse_leaves(dir / "leaves.tsv");
  const SnapshotBlock modes_block = io::read_matrix(dir / "modes.hpd");
  const Vector sigmas = parse_sigmas(dir / "sigmas.txt");

  std::map<NodeId, std::size_t> reported;
  {
    std::istringstream in(read_text(dir / "report.tsv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream f(line);
      std::vector<std::string> cells;
      std::string cell;
      while (std::getline(f, cell, '\t')) cells.push_back(cell);
      if (cells.size() < 8) throw InputError((dir / "report.tsv").string() + ": malformed row '" + line + "'");
      reported[parse_size(cells[0], "report node")] = parse_size(cells[7], "report output_modes");
    }
  }

  std::vector<std::size_t> counts(tree.node_count(), 0);
  std::map<NodeId, LeafRange> range_of;
  for (const LeafRange& lr : ranges) {
    if (lr.leaf >= tree.node_count() || !tree.is_leaf(lr.leaf)) {
      throw InputError("leaves.tsv names node " + std::to_string(lr.leaf) + ", which is not a leaf");
    }
    if (lr.first + lr.count > all.count()) throw InputError("leaves.tsv range exceeds the input columns");
    counts[lr.leaf] = static_cast<std::size_t>(lr.count);
    range_of[lr.leaf] = lr;
  }
  const ToleranceAssignment tol = assign_tolerances(tree, counts, eps_star, omega, policy);
  const auto total = static_cast<std::size_t>(all.count());
  const ModeSet modes(all.space(), sigmas, modes_block.values(), summary.count("orthonormal") == 0 ||
                                                                    summary.at("orthonormal") == "1");

  std::vector<CheckResult> checks;
  auto add = [&](std::string name, bool ok, std::string detail) {
    checks.push_back({std::move(name), ok, std::move(detail)});
  };

  // Oracle: singular values of the subordinate snapshots of a node.
  auto below_sigmas = [&](NodeId node, Index& count) {
    Matrix cols_below(all.dim(), 0);
    count = 0;
    for (NodeId g : maps.nodes_below(node)) {
      const auto it = range_of.find(g);
      if (it == range_of.end()) continue;
      cols_below.conservativeResize(Eigen::NoChange, count + it->second.count);
      cols_below.middleCols(count, it->second.count) = all.values().middleCols(it->second.first, it->second.count);
      count += it->second.count;
    }
    return linalg::singular_values(all.space().to_euclidean(cols_below));
  };
  auto pod_count = [](const Vector& s, double eps, Index count) {
    if (eps == 0.0) return static_cast<std::size_t>(count);
    return truncation_rank(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())), eps);
  };

  Index all_count = 0;
  const Vector direct = below_sigmas(tree.root(), all_count);
  const double energy = all.total_energy();

  // (a) mean l2 error against the target.
  ProjectionErrorAccumulator acc(modes);
  acc.add(all);
  const double mean_error = acc.mean();
  add("a:mean-error", mean_error <= eps_star * eps_star * (1 + 1e-8),
      "measured " + num(mean_error) + " <= target " + num(eps_star * eps_star));

  double sum_eps2 = 0.0;
  for (double e : tol.epsilon) sum_eps2 += e * e;
  add("error-bound", acc.total() <= sum_eps2 + 1e-8 * energy,
      "total " + num(acc.total()) + " <= sum of squared local tolerances " + num(sum_eps2));

  // (b) root mode count against the direct POD at the root tolerance.
  const double root_eps = std::sqrt(static_cast<double>(total)) * omega * eps_star;
  const std::size_t direct_count = pod_count(direct, root_eps, all_count);
  add("b:root-mode-bound", static_cast<std::size_t>(modes.size()) <= direct_count,
      std::to_string(modes.size()) + " modes <= direct POD count " + std::to_string(direct_count) + " at " +
          num(root_eps));

  // (c) intermediate counts against the local bound; (d) every node against its own tolerance.
  const double local_scale =
      maps.depth > 1 ? std::sqrt(1 - omega * omega) * eps_star / std::sqrt(static_cast<double>(maps.depth - 1)) : 0.0;
  std::size_t local_violations = 0, node_violations = 0, local_checked = 0;
  std::string first_local, first_node;
  for (NodeId a = 0; a < tree.node_count(); ++a) {
    const auto it = reported.find(a);
    if (it == reported.end()) {
      ++node_violations;
      if (first_node.empty()) first_node = "node " + std::to_string(a) + " missing from report.tsv";
      continue;
    }
    Index count = 0;
    const Vector s = below_sigmas(a, count);
    const std::size_t own = pod_count(s, tol[a], count);
    if (it->second > own) {
      ++node_violations;
      if (first_node.empty()) {
        first_node = "node " + std::to_string(a) + ": " + std::to_string(it->second) + " > " + std::to_string(own);
      }
    }
    const bool theorem_node = a != tree.root() && (!tree.is_leaf(a) || policy == LeafPolicy::Theorem);
    if (theorem_node) {
      ++local_checked;
      const std::size_t local = pod_count(s, std::sqrt(static_cast<double>(count)) * local_scale, count);
      if (it->second > local) {
        ++local_violations;
        if (first_local.empty()) {
          first_local = "node " + std::to_string(a) + ": " + std::to_string(it->second) + " > " + std::to_string(local);
        }
      }
    }
  }
  add("c:local-mode-bound", local_violations == 0,
      std::to_string(local_checked) + " nodes checked" + (first_local.empty() ? "" : ", first violation " + first_local));
  add("d:node-mode-bound", node_violations == 0,
      std::to_string(tree.node_count()) + " nodes checked" + (first_node.empty() ? "" : ", first violation " + first_node));

  // Sigma file: shape, ordering, interlacing with the direct spectrum, recorded energy.
  std::string sigma_problem;
  if (sigmas.size() != modes_block.count()) {
    sigma_problem = std::to_string(sigmas.size()) + " values for " + std::to_string(modes_block.count()) + " modes";
  } else if (summary.count("root_modes") && parse_size(summary.at("root_modes"), "root_modes") !=
                                                static_cast<std::size_t>(sigmas.size())) {
    sigma_problem = "count differs from summary root_modes";
  } else if (!sigmas.allFinite() || (sigmas.size() > 0 && sigmas.minCoeff() < 0.0)) {
    sigma_problem = "negative or non-finite value";
  } else {
    for (Index k = 1; k < sigmas.size() && sigma_problem.empty(); ++k) {
      if (sigmas[k] > sigmas[k - 1]) sigma_problem = "not non-increasing at index " + std::to_string(k);
    }
    if (modes.orthonormal) {
      const Matrix coeff = all.space().cross_gramian(modes.modes, all.values());
      for (Index k = 0; k < sigmas.size() && sigma_problem.empty(); ++k) {
        const double upper = k < direct.size() ? direct[k] : 0.0;
        if (sigmas[k] > upper * (1 + 1e-10) + 1e-14 * (direct.size() ? direct[0] : 0.0)) {
          sigma_problem = "sigma " + std::to_string(k) + " exceeds the direct singular value";
        } else if (sigmas[k] > coeff.row(k).norm() * (1 + 1e-8) + 1e-14 * std::sqrt(energy)) {
          sigma_problem = "sigma " + std::to_string(k) + " exceeds the energy captured by its mode";
        }
      }
    }
    if (sigma_problem.empty() && summary.count("sigma_energy")) {
      const double recorded = parse_double(summary.at("sigma_energy"), "sigma_energy");
      if (std::abs(recorded - sigmas.squaredNorm()) > 1e-12 * std::max(recorded, 1e-300)) {
        sigma_problem = "sum of squares differs from summary sigma_energy";
      }
    }
  }
  add("sigmas", sigma_problem.empty(),
      sigma_problem.empty() ? std::to_string(sigmas.size()) + " values consistent" : sigma_problem);

  for (const CheckResult& c : checks) log << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  return checks;
}

void cmd_bench(const BenchOptions& opt, std::ostream& table, std::ostream& log) {
  table << "snapshots\ttopology\tdepth\tblock\tleaves\twall_time\tsequential_time\tcritical_path_time\tpeak_modes\t"
           "root_modes\n";
  const PodBackend backend{opt.backend};
  for (std::size_t n : opt.sizes) {
    const SnapshotBlock data = synthetic_decay(opt.rows, static_cast<Index>(n), opt.decay, opt.seed);
    for (const std::string& top : opt.topologies) {
      const auto start = Clock::now();
      if (top == "pod") {
        const ModeSet m = pod(data, std::sqrt(static_cast<double>(n)) * opt.eps_star, backend);
        const double t = seconds_since(start);
        table << n << "\tpod\t1\t" << n << "\t1\t" << num(t) << '\t' << num(t) << '\t' << num(t) << '\t' << n << '\t'
              << m.size() << '\n';
      } else {
        const std::size_t leaves = (n + opt.block_size - 1) / opt.block_size;
        const RootedTree tree = make_topology(top, leaves, 3);
        const LeafAssignment assignment = LeafAssignment::split_uniform(tree, data);
        const LeafPolicy policy = top == "chain" ? LeafPolicy::Zero : LeafPolicy::Theorem;
        const ToleranceAssignment tol =
            assign_tolerances(tree, assignment.counts(tree.node_count()), opt.eps_star, opt.omega, policy);
        const auto [r, stats] = run_parallel(tree, assignment, tol, backend, opt.workers);
        const double t = seconds_since(start);
        table << n << '\t' << top << '\t' << derive_maps(tree).depth << '\t' << opt.block_size << '\t' << leaves
              << '\t' << num(t) << '\t' << num(stats.sequential_time) << '\t' << num(stats.critical_path_time) << '\t'
              << stats.peak_resident_modes << '\t' << r.modes.size() << '\n';
      }
      table.flush();
      log << "bench " << top << " |S|=" << n << " done in " << seconds_since(start) << " s\n";
    }
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical approximate proper orthogonal decomposition"};
  app.name("hapod");
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "generate snapshot data");
  gen->require_subcommand(1);
  GenBurgersOptions burgers;
  auto* gb = gen->add_subcommand("burgers", "forced inviscid Burgers trajectory");
  gb->add_option("--n", burgers.config.grid_size, "spatial nodes")->capture_default_str();
  gb->add_option("--steps", burgers.config.step_count, "explicit Euler steps")->capture_default_str();
  gb->add_option("--dt", burgers.config.time_step, "time step")->capture_default_str();
  gb->add_option("--spark-probability", burgers.config.spark_probability, "per-step forcing probability")
      ->capture_default_str();
  gb->add_option("--spark-max", burgers.config.spark_max, "upper end of the forcing amplitude")->capture_default_str();
  gb->add_option("--seed", burgers.config.seed, "generator seed")->capture_default_str();
  gb->add_option("-o,--out", burgers.output, "output matrix file")->required();
  gb->add_flag("--force", burgers.force, "overwrite existing files");

  GenSyntheticOptions synth;
  auto* gs = gen->add_subcommand("synthetic", "random data with singular values exp(-decay * n)");
  gs->add_option("--d", synth.rows, "rows")->capture_default_str();
  gs->add_option("--m", synth.cols, "columns")->capture_default_str();
  gs->add_option("--decay", synth.decay, "decay rate")->capture_default_str();
  gs->add_option("--seed", synth.seed, "generator seed")->capture_default_str();
  gs->add_option("-o,--out", synth.output, "output matrix file")->required();
  gs->add_flag("--force", synth.force, "overwrite existing files");

  RunOptions run;
  std::string run_backend = "gram";
  auto* rc = app.add_subcommand("run", "run POD/HAPOD over a matrix file");
  rc->fallthrough();
  app.set_config("--manifest", "", "read run options from the manifest.toml of an earlier run");
  rc->add_option("-i,--input", run.input, "snapshot matrix (.hpd or .csv)");
  rc->add_option("-o,--out", run.output_dir, "results directory");
  rc->add_option("--topology", run.topology, "single|star|chain|balanced|balanced:<depth>|file:<path>")
      ->capture_default_str();
  rc->add_option("--blocks", run.blocks, "number of leaf blocks")->capture_default_str();
  rc->add_option("--block-size", run.block_size, "columns per leaf block (overrides --blocks)");
  rc->add_option("--split", run.split, "explicit leaf sizes, comma separated")->delimiter(',');
  rc->add_option("--depth", run.depth, "depth of balanced trees")->capture_default_str();
  rc->add_option("--eps-star", run.eps_star, "target mean l2 error")->required();
  rc->add_option("--omega", run.omega, "share of the error budget at the root")->capture_default_str();
  rc->add_option("--leaf-policy", run.leaf_policy, "theorem|zero (default: zero for chain, theorem otherwise)");
  rc->add_option("--workers", run.workers, "worker threads")->capture_default_str();
  rc->add_option("--backend", run_backend, "gram|svd")->capture_default_str();
  rc->add_flag("--track-right-factor", run.track_right_factor, "also write the accumulated right factor");
  rc->add_option("--seed", run.seed, "seed recorded in the manifest")->capture_default_str();
  rc->add_flag("--force", run.force, "overwrite an existing results directory");

  VerifyOptions verify;
  auto* vc = app.add_subcommand("verify", "check a results directory against a direct POD");
  vc->add_option("results", verify.results, "results directory written by run")->required();
  vc->add_option("-i,--input", verify.input, "snapshot matrix (default: the one recorded in the manifest)");
  vc->add_option("--cap", verify.entry_cap, "largest rows * cols handled by the dense oracle")->capture_default_str();

  BenchOptions bench;
  std::string bench_backend = "gram";
  fs::path bench_out;
  auto* bc = app.add_subcommand("bench", "timing sweep on synthetic data");
  bc->add_option("--sizes", bench.sizes, "snapshot counts, comma separated")->delimiter(',')->capture_default_str();
  bc->add_option("--d", bench.rows, "rows")->capture_default_str();
  bc->add_option("--decay", bench.decay, "decay rate")->capture_default_str();
  bc->add_option("--eps-star", bench.eps_star, "target mean l2 error")->capture_default_str();
  bc->add_option("--omega", bench.omega, "share of the error budget at the root")->capture_default_str();
  bc->add_option("--topologies", bench.topologies, "pod|single|star|chain|balanced:<depth>|file:<path>")
      ->delimiter(',')
      ->capture_default_str();
  bc->add_option("--block", bench.block_size, "columns per leaf")->capture_default_str();
  bc->add_option("--workers", bench.workers, "worker threads")->capture_default_str();
  bc->add_option("--seed", bench.seed, "generator seed")->capture_default_str();
  bc->add_option("--backend", bench_backend, "gram|svd")->capture_default_str();
  bc->add_option("-o,--out", bench_out, "write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gb->parsed()) {
      cmd_gen_burgers(burgers, out);
    } else if (gs->parsed()) {
      cmd_gen_synthetic(synth, out);
    } else if (rc->parsed()) {
      run.backend = parse_backend(run_backend);
      cmd_run(run, out);
    } else if (vc->parsed()) {
      const auto checks = cmd_verify(verify, out);
      const bool ok = std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
      out << (ok ? "verification passed\n" : "verification FAILED\n");
      if (!ok) return kExitVerifyFailed;
    } else if (bc->parsed()) {
      bench.backend = parse_backend(bench_backend);
      if (bench.block_size < 1) throw ParameterError("--block must be >= 1");
      if (bench_out.empty()) {
        cmd_bench(bench, out, err);
      } else {
        std::ofstream table(bench_out, std::ios::trunc);
        if (!table) throw IoError(bench_out.string() + ": cannot open for writing");
        cmd_bench(bench, table, err);
      }
    }
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace hapod::cli
