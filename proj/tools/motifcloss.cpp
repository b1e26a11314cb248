// Command-line surface: census, contraction-loss ranking, motif detection,
// recursive condensation, and contraction-bound verification.
//
// Exit codes: 0 success, 1 internal error, 2 usage or input error.

#include <CLI11.hpp>

#include <algorithm>
#include <deque>
#include <exception>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "motifcloss/motifcloss.hpp"

namespace {

using namespace motifcloss;

// Input-side failures (missing files, malformed data, bad flag combinations)
// exit with 2; anything unexpected exits with 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string input;
  std::vector<int> ns{3};
  std::string measure = "spectral";
  int samples = 10000;
  int ensemble = 1000;
  double amax = 1.0;
  std::uint64_t seed = 0;
  int swap_factor = 100;
  std::string out_dir;
  int threads = 0;  // 0 = auto (MOTIF_CLOSS_THREADS, then hardware)
  std::string format = "csv";
  int trials = 8;
  std::string dump_trajectory;
};

std::vector<int> clean_sizes(const std::vector<int>& ns) {
  if (ns.empty()) throw UsageError("at least one --n value is required");
  std::set<int> unique(ns.begin(), ns.end());
  for (int n : unique)
    if (n != 3 && n != 4) throw UsageError("--n must be 3 or 4");
  return std::vector<int>(unique.begin(), unique.end());
}

Digraph load_graph(const std::string& path) {
  if (path.empty()) throw UsageError("--input is required");
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }
  try {
    return load_edge_list(text).graph;
  } catch (const ParseError& e) {
    throw UsageError(std::string(path) + ": " + e.what());
  }
}

MeasureKind parse_measure(const std::string& name) {
  try {
    return measure_from_name(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// The resolved thread count never enters the report: output must be
// byte-identical across thread counts.
void emit(const Options& opt, const std::string& file_name, const std::string& content) {
  if (opt.out_dir.empty()) {
    std::cout << content;
    return;
  }
  std::filesystem::create_directories(opt.out_dir);
  write_text_file((std::filesystem::path(opt.out_dir) / file_name).string(), content);
}

std::string sizes_text(const std::vector<int>& ns) {
  std::string out;
  for (std::size_t i = 0; i < ns.size(); ++i)
    out += (i > 0 ? "," : "") + std::to_string(ns[i]);
  return out;
}

int cmd_census(const Options& opt) {
  auto sizes = clean_sizes(opt.ns);
  Digraph g = load_graph(opt.input);
  std::vector<CensusResult> results;
  for (int n : sizes) {
    CensusOptions census_options;
    census_options.threads = opt.threads;
    results.push_back(census(g, n, census_options));
  }
  ReportMeta meta;
  meta.command = "census";
  meta.add("input", opt.input);
  meta.add("n", sizes_text(sizes));
  emit(opt, opt.format == "json" ? "census.json" : "census.csv",
       opt.format == "json" ? census_json(results, meta) : census_csv(results, meta));
  return 0;
}

int cmd_closs(const Options& opt) {
  auto sizes = clean_sizes(opt.ns);
  MeasureKind measure = parse_measure(opt.measure);
  if (opt.samples < 2) throw UsageError("--samples must be at least 2");
  if (!(opt.amax > 0.0)) throw UsageError("--amax must be positive");
  std::vector<ClossTable> tables;
  for (int n : sizes) {
    ClossOptions closs_options;
    closs_options.samples = opt.samples;
    closs_options.a_max = opt.amax;
    closs_options.seed = opt.seed;
    closs_options.threads = opt.threads;
    tables.push_back(closs_table(n, measure, closs_options));
  }
  ReportMeta meta;
  meta.command = "closs";
  meta.add("n", sizes_text(sizes));
  meta.add("measure", opt.measure);
  meta.add("samples", static_cast<std::int64_t>(opt.samples));
  meta.add("amax", opt.amax);
  meta.add("seed", static_cast<std::int64_t>(opt.seed));
  emit(opt, opt.format == "json" ? "closs.json" : "closs.csv",
       opt.format == "json" ? closs_json(tables, meta) : closs_csv(tables, meta));
  return 0;
}

int cmd_motifs(const Options& opt) {
  auto sizes = clean_sizes(opt.ns);
  MeasureKind measure = parse_measure(opt.measure);
  if (opt.samples < 2) throw UsageError("--samples must be at least 2");
  if (opt.ensemble < 2) throw UsageError("--ensemble must be at least 2");
  if (!(opt.amax > 0.0)) throw UsageError("--amax must be positive");
  if (opt.swap_factor < 1) throw UsageError("--swap-factor must be at least 1");
  Digraph g = load_graph(opt.input);

  std::deque<ClossTable> tables;  // stable addresses for the report blocks
  std::vector<MotifReportBlock> blocks;
  for (int n : sizes) {
    ZscoreOptions zopt;
    zopt.ensemble_size = opt.ensemble;
    zopt.swap_factor = opt.swap_factor;
    zopt.seed = opt.seed;
    zopt.threads = opt.threads;
    ClossOptions copt;
    copt.samples = opt.samples;
    copt.a_max = opt.amax;
    copt.seed = opt.seed;
    copt.threads = opt.threads;

    MotifReportBlock block;
    block.n = n;
    block.stats = zscores(g, n, zopt);
    block.profile = significance_profile(n, block.stats);
    tables.push_back(closs_table(n, measure, copt));
    block.closs = &tables.back();
    block.join = join_zscore_closs(n, block.stats, tables.back().relative);
    blocks.push_back(std::move(block));
  }

  ReportMeta meta;
  meta.command = "motifs";
  meta.add("input", opt.input);
  meta.add("n", sizes_text(sizes));
  meta.add("measure", opt.measure);
  meta.add("samples", static_cast<std::int64_t>(opt.samples));
  meta.add("ensemble", static_cast<std::int64_t>(opt.ensemble));
  meta.add("amax", opt.amax);
  meta.add("swap_factor", static_cast<std::int64_t>(opt.swap_factor));
  meta.add("seed", static_cast<std::int64_t>(opt.seed));
  emit(opt, opt.format == "json" ? "motifs.json" : "motifs.csv",
       opt.format == "json" ? motifs_json(blocks, meta) : motifs_csv(blocks, meta));
  return 0;
}

int cmd_condense(const Options& opt) {
  if (opt.format != "json") throw UsageError("condense emits JSON; use --format json");
  auto sizes = clean_sizes(opt.ns);
  MeasureKind measure = parse_measure(opt.measure);
  if (opt.samples < 2) throw UsageError("--samples must be at least 2");
  if (opt.ensemble < 2) throw UsageError("--ensemble must be at least 2");
  if (opt.swap_factor < 1) throw UsageError("--swap-factor must be at least 1");
  Digraph g = load_graph(opt.input);

  CondenseOptions copt;
  copt.sizes = sizes;
  copt.significance.ensemble_size = opt.ensemble;
  copt.significance.swap_factor = opt.swap_factor;
  copt.significance.seed = opt.seed;
  copt.significance.threads = opt.threads;
  auto trace = condense_motifs(g, copt);

  std::vector<ClossTable> tables;
  for (int n : sizes) {
    ClossOptions loss_options;
    loss_options.samples = opt.samples;
    loss_options.a_max = opt.amax;
    loss_options.seed = opt.seed;
    loss_options.threads = opt.threads;
    tables.push_back(closs_table(n, measure, loss_options));
  }
  auto histograms = closs_histogram(trace, tables);

  ReportMeta meta;
  meta.command = "condense";
  meta.add("input", opt.input);
  meta.add("n", sizes_text(sizes));
  meta.add("measure", opt.measure);
  meta.add("samples", static_cast<std::int64_t>(opt.samples));
  meta.add("ensemble", static_cast<std::int64_t>(opt.ensemble));
  meta.add("amax", opt.amax);
  meta.add("swap_factor", static_cast<std::int64_t>(opt.swap_factor));
  meta.add("seed", static_cast<std::int64_t>(opt.seed));
  emit(opt, "condense.json", condense_json(trace, &histograms, meta));
  return 0;
}

int cmd_verify(const Options& opt) {
  if (opt.format != "json") throw UsageError("verify emits JSON; use --format json");
  if (opt.input.empty()) throw UsageError("--input is required");
  if (opt.trials < 1) throw UsageError("--trials must be at least 1");
  MeasureKind measure = parse_measure(opt.measure);
  DynamicalSystem sys;
  try {
    sys = system_from_json(read_text_file(opt.input));
  } catch (const std::exception& e) {
    throw UsageError(std::string(opt.input) + ": " + e.what());
  }

  BoundOptions bopt;
  bopt.trials = opt.trials;
  bopt.seed = opt.seed;
  auto report = check_bound(sys.nodes, sys.coupling, measure, bopt);

  ReportMeta meta;
  meta.command = "verify";
  meta.add("input", opt.input);
  meta.add("measure", opt.measure);
  meta.add("trials", static_cast<std::int64_t>(opt.trials));
  meta.add("seed", static_cast<std::int64_t>(opt.seed));
  emit(opt, "verify.json", verify_json(report, meta));

  if (!opt.dump_trajectory.empty()) {
    RngStream rng = RngStream::derive(opt.seed, rng_salt::kBoundTrial, 0);
    const auto n = static_cast<Eigen::Index>(sys.nodes.size());
    Eigen::VectorXd xa(n), xb(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      xa(i) = rng.uniform(-2.0, 2.0);
      xb(i) = rng.uniform(-2.0, 2.0);
    }
    double dt = report.dt > 0.0 ? report.dt : 0.9 * max_step(sys.nodes, sys.coupling);
    double horizon = report.horizon > 0.0 ? report.horizon : 10.0;
    auto pair = simulate(sys.nodes, sys.coupling, xa, xb, horizon, dt);
    ReportMeta traj_meta;
    traj_meta.command = "verify-trajectory";
    traj_meta.add("input", opt.input);
    traj_meta.add("seed", static_cast<std::int64_t>(opt.seed));
    traj_meta.add("dt", dt);
    traj_meta.add("horizon", horizon);
    write_text_file(opt.dump_trajectory, trajectory_csv(pair, traj_meta));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Contraction loss, motif significance, and condensation for directed networks"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* cmd, bool needs_input) {
    if (needs_input)
      cmd->add_option("--input", opt.input, "edge-list input file (u v [weight] per line)");
    cmd->add_option("--n", opt.ns, "subgraph size(s), 3 and/or 4")->expected(-1);
    cmd->add_option("--threads", opt.threads,
                    "worker threads (0 = MOTIF_CLOSS_THREADS env, then hardware)");
    cmd->add_option("--out", opt.out_dir, "output directory (default: stdout)");
    cmd->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", opt.seed, "random seed (recorded in every report)");
    return cmd;
  };
  auto add_measure = [&](CLI::App* cmd) {
    cmd->add_option("--measure", opt.measure, "matrix measure")
        ->check(CLI::IsMember({"spectral", "one", "two", "infinity"}));
  };

  CLI::App* census_cmd = add_common(app.add_subcommand("census", "count connected subgraph classes"), true);
  (void)census_cmd;

  CLI::App* closs_cmd =
      add_common(app.add_subcommand("closs", "rank all classes by mean contraction loss"), false);
  add_measure(closs_cmd);
  closs_cmd->add_option("--samples", opt.samples, "weight samples per class");
  closs_cmd->add_option("--amax", opt.amax, "weight scale: entries uniform in (0, amax]");

  CLI::App* motifs_cmd =
      add_common(app.add_subcommand("motifs", "detect motifs and join Z-scores with loss"), true);
  add_measure(motifs_cmd);
  motifs_cmd->add_option("--samples", opt.samples, "weight samples per class");
  motifs_cmd->add_option("--amax", opt.amax, "weight scale: entries uniform in (0, amax]");
  motifs_cmd->add_option("--ensemble", opt.ensemble, "randomized null-model ensemble size");
  motifs_cmd->add_option("--swap-factor", opt.swap_factor, "swap attempts per edge");

  CLI::App* condense_cmd =
      add_common(app.add_subcommand("condense", "recursively condense motifs into supernodes"), true);
  add_measure(condense_cmd);
  condense_cmd->add_option("--samples", opt.samples, "weight samples per class");
  condense_cmd->add_option("--amax", opt.amax, "weight scale: entries uniform in (0, amax]");
  condense_cmd->add_option("--ensemble", opt.ensemble, "randomized null-model ensemble size");
  condense_cmd->add_option("--swap-factor", opt.swap_factor, "swap attempts per edge");

  CLI::App* verify_cmd = add_common(
      app.add_subcommand("verify", "check the contraction bound on a node system"), true);
  add_measure(verify_cmd);
  verify_cmd->add_option("--trials", opt.trials, "random initial-condition pairs");
  verify_cmd->add_option("--dump-trajectory", opt.dump_trajectory,
                         "also write one trajectory pair as CSV to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  // condense and verify default to JSON output.
  if ((app.got_subcommand("condense") && condense_cmd->count("--format") == 0) ||
      (app.got_subcommand("verify") && verify_cmd->count("--format") == 0))
    opt.format = "json";

  try {
    if (app.got_subcommand("census")) return cmd_census(opt);
    if (app.got_subcommand("closs")) return cmd_closs(opt);
    if (app.got_subcommand("motifs")) return cmd_motifs(opt);
    if (app.got_subcommand("condense")) return cmd_condense(opt);
    if (app.got_subcommand("verify")) return cmd_verify(opt);
    std::cerr << "error: no command\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
