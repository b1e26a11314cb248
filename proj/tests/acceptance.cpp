// Acceptance gate: runs every release criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion.  Exits non-zero if any fail.
//
// Criteria with runtime limits measure wall time and fail honestly when over.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "motifcloss/motifcloss.hpp"
#include "motifcloss/reference_systems.hpp"
#include "oracles.hpp"

namespace {

using namespace motifcloss;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

MeasureKind spectral_measure() { return MeasureKind::spectral(); }

std::string fmt(double v) { return format_double(v); }

// Library class -> oracle key, through the class's representative digraph.
oracles::EdgeSet oracle_key(const SubgraphClass& cls) {
  oracles::EdgeSet edges;
  Digraph rep = class_digraph(cls);
  for (auto [u, v] : rep.edges()) edges.insert({u, v});
  return oracles::canonical_edges(edges, cls.n);
}

bool pattern_acyclic(std::uint16_t bits, int n) {
  std::vector<int> indeg(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && pattern_has_edge(bits, n, i, j)) ++indeg[static_cast<std::size_t>(j)];
  std::vector<int> ready;
  for (int i = 0; i < n; ++i)
    if (indeg[static_cast<std::size_t>(i)] == 0) ready.push_back(i);
  int removed = 0;
  while (!ready.empty()) {
    int u = ready.back();
    ready.pop_back();
    ++removed;
    for (int j = 0; j < n; ++j)
      if (u != j && pattern_has_edge(bits, n, u, j) && --indeg[static_cast<std::size_t>(j)] == 0)
        ready.push_back(j);
  }
  return removed == n;
}

std::uint16_t catalog_bits(const std::string& id) {
  for (const auto& e : motif_catalog())
    if (e.id == id) return e.canon_bits;
  throw std::logic_error("catalog id missing: " + id);
}

// Shared planted-network significance scan, reused by criteria 10 and 11.
const std::vector<MotifStats>& planted_zscores() {
  static const std::vector<MotifStats> stats = [] {
    ZscoreOptions opt;
    opt.ensemble_size = 600;
    opt.seed = 17;
    return zscores(planted_ffl_network(), 3, opt);
  }();
  return stats;
}

const MotifStats* find_stats(const std::vector<MotifStats>& stats, std::uint16_t canon) {
  for (const auto& st : stats)
    if (st.cls.canon_bits == canon) return &st;
  return nullptr;
}

// ---------------------------------------------------------------------------
// 1. Class enumeration vs the brute-force oracle, under one second.

bool criterion_enumeration(std::string& detail) {
  auto start = Clock::now();
  auto c3 = enumerate_classes(3);
  auto c4 = enumerate_classes(4);
  double lib_time = seconds_since(start);

  bool ok = c3.size() == 13 && c4.size() == 199;
  for (int n : {3, 4}) {
    auto oracle = oracles::all_connected_classes(n);
    std::set<oracles::EdgeSet> mapped;
    for (const auto& cls : (n == 3 ? c3 : c4)) mapped.insert(oracle_key(cls));
    ok = ok && mapped == oracle;
  }
  ok = ok && lib_time < 1.0;
  detail = "13 three-node, 199 four-node classes, oracle bijection, " + fmt(lib_time) + " s";
  return ok;
}

// ---------------------------------------------------------------------------
// 2. Every acyclic class has exactly zero loss under the spectral measure.

bool criterion_zero_loss(std::string& detail) {
  ClossOptions opt;
  opt.samples = 500;
  opt.seed = 3;
  int acyclic = 0;
  double worst = 0.0;
  std::set<std::uint16_t> seen3, seen4;
  for (int n : {3, 4})
    for (const auto& cls : enumerate_classes(n)) {
      if (!pattern_acyclic(cls.canon_bits, cls.n)) continue;
      ++acyclic;
      (n == 3 ? seen3 : seen4).insert(cls.canon_bits);
      auto s = closs_sample_stats(pattern_matrix(cls.canon_bits, cls.n), spectral_measure(), opt);
      worst = std::max({worst, std::abs(s.mean), std::abs(s.stddev)});
    }
  bool covers_motifs = seen3.count(catalog_bits("M2")) && seen4.count(catalog_bits("M4")) &&
                       seen4.count(catalog_bits("M5"));
  detail = std::to_string(acyclic) + " acyclic classes, worst |mean|,|std| = " + fmt(worst) +
           ", includes feed-forward loop / bi-fan / bi-parallel";
  return worst <= 1e-12 && covers_motifs && acyclic > 0;
}

// ---------------------------------------------------------------------------
// 3. Acyclic catalog motifs attain the minimum mean in their density class,
//    stable over five seeds at 10^4 samples.

bool criterion_minimal_in_class(std::string& detail) {
  struct Target {
    std::string id;
    int n;
  };
  const std::vector<Target> targets = {{"M1", 3}, {"M2", 3}, {"M4", 4}, {"M5", 4}};
  bool ok = true;
  int checks = 0;
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    ClossOptions opt;
    opt.samples = 10000;
    opt.seed = seed;
    for (const auto& t : targets) {
      std::uint16_t bits = catalog_bits(t.id);
      SubgraphClass motif_cls = canonical_form(bits, t.n);
      double motif_mean = 0.0;
      double best_other = std::numeric_limits<double>::infinity();
      for (const auto& cls : enumerate_classes(t.n)) {
        if (cls.edge_count != motif_cls.edge_count) continue;
        double m = mean_closs(cls, spectral_measure(), opt).mean;
        if (cls.canon_bits == bits)
          motif_mean = m;
        else
          best_other = std::min(best_other, m);
      }
      ok = ok && motif_mean <= best_other;
      ++checks;
    }
  }
  detail = std::to_string(checks) + " motif/seed combinations, minimum attained in every density class";
  return ok;
}

// ---------------------------------------------------------------------------
// 4. Monte-Carlo means match the closed-form expectations.

bool criterion_analytic_means(std::string& detail) {
  auto start = Clock::now();
  ClossOptions opt;
  opt.samples = 10000;
  opt.seed = 42;

  Eigen::MatrixXd cycle3 = pattern_matrix(catalog_bits("M3"), 3);
  double cycle_mean = closs_sample_stats(cycle3, spectral_measure(), opt).mean;

  Eigen::MatrixXd dyad = Eigen::MatrixXd::Zero(2, 2);
  dyad(0, 1) = dyad(1, 0) = 1.0;
  double dyad_mean = closs_sample_stats(dyad, spectral_measure(), opt).mean;

  double elapsed = seconds_since(start);
  double cycle_err = std::abs(cycle_mean - 27.0 / 64.0);
  double dyad_err = std::abs(dyad_mean - 4.0 / 9.0);
  detail = "3-cycle " + fmt(cycle_mean) + " vs 27/64, mutual dyad " + fmt(dyad_mean) +
           " vs 4/9, " + fmt(elapsed) + " s";
  return cycle_err <= 0.01 && dyad_err <= 0.01 && elapsed < 5.0;
}

// ---------------------------------------------------------------------------
// 5. Positive homogeneity: doubling the weight scale doubles the mean exactly.

bool criterion_scale_equivariance(std::string& detail) {
  bool ok = true;
  for (std::uint16_t bits : {catalog_bits("M2"), catalog_bits("M3"), catalog_bits("M6")}) {
    int n = bits == catalog_bits("M6") ? 4 : 3;
    Eigen::MatrixXd pattern = pattern_matrix(bits, n);
    ClossOptions base;
    base.samples = 2000;
    base.seed = 7;
    ClossOptions doubled = base;
    doubled.a_max = 2.0;
    auto s1 = closs_sample_stats(pattern, spectral_measure(), base);
    auto s2 = closs_sample_stats(pattern, spectral_measure(), doubled);
    ok = ok && s2.mean == 2.0 * s1.mean && s2.stddev == 2.0 * s1.stddev;
  }
  detail = "mean and std double bitwise for a_max 1 -> 2 on three classes";
  return ok;
}

// ---------------------------------------------------------------------------
// 6. The spectral abscissa lower-bounds every implemented measure.

bool criterion_measure_optimality(std::string& detail) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 1000; ++k) {
    RngStream rng = RngStream::derive(99, rng_salt::kReference, static_cast<std::uint64_t>(k));
    Eigen::MatrixXd a(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) a(i, j) = rng.uniform(-2.0, 2.0);
    double lower = mu(MeasureKind::spectral(), a);
    for (const MeasureKind& kind :
         {MeasureKind::one(), MeasureKind::two(), MeasureKind::infinity()})
      worst = std::max(worst, lower - mu(kind, a));
  }
  detail = "1000 random 4x4 matrices, worst spectral excess " + fmt(worst);
  return worst <= 1e-9;
}

// ---------------------------------------------------------------------------
// 7. metric_for delivers a weighted measure within epsilon of the abscissa.

bool criterion_metric_contract(std::string& detail) {
  const double eps = 1e-6;
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 200; ++k) {
    RngStream rng = RngStream::derive(123, rng_salt::kReference, static_cast<std::uint64_t>(k));
    Eigen::MatrixXd a(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) a(i, j) = rng.uniform(-2.0, 2.0);
    if (k % 2 == 1)  // exercise the Metzler route on half the inputs
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          if (i != j) a(i, j) = std::abs(a(i, j));
    Metric p = metric_for(a, eps);
    worst = std::max(worst, mu(MeasureKind::weighted_two(p), a) - mu(MeasureKind::spectral(), a));
  }
  detail = "200 matrices (half Metzler), worst weighted excess " + fmt(worst) +
           " vs epsilon " + fmt(eps);
  return worst <= eps + 1e-8;
}

// ---------------------------------------------------------------------------
// 8. Contraction envelope holds on 50 random systems in the matched norm.

struct RandomSystem {
  std::vector<TestNode> nodes;
  Eigen::MatrixXd coupling;
};

// Irreducible Metzler coupling (permutation cycle plus random extra edges)
// with heterogeneous nonlinear nodes; the matched metric is diagonal.
RandomSystem random_metzler_system(std::uint64_t index) {
  RngStream rng = RngStream::derive(2024, rng_salt::kReference, 1000 + index);
  int n = 3 + static_cast<int>(rng.below(18));  // 3..20
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i)
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i + 1)))]);
  for (int i = 0; i < n; ++i)
    a(order[static_cast<std::size_t>((i + 1) % n)], order[static_cast<std::size_t>(i)]) =
        rng.uniform(0.2, 1.0);
  for (int extra = 0; extra < n; ++extra) {
    int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    if (i != j && a(i, j) == 0.0) a(i, j) = rng.uniform(0.2, 1.0);
  }

  std::vector<double> rates;
  for (int i = 0; i < n; ++i) rates.push_back(rng.uniform(1.2, 3.0));
  double min_rate = *std::min_element(rates.begin(), rates.end());
  double delta = rng.uniform(0.25, 0.7);
  double rho = spectral_abscissa(a);  // Perron root, positive for a cycle
  a *= (min_rate - delta) / rho;

  RandomSystem sys;
  sys.coupling = a;
  for (int i = 0; i < n; ++i) {
    double gain = rng.uniform(0.0, 0.5);
    sys.nodes.push_back({rates[static_cast<std::size_t>(i)] + gain, gain});
  }
  return sys;
}

// Dense sign-mixed coupling with identical linear nodes; the matched metric
// comes from the Lyapunov route.
RandomSystem random_linear_system(std::uint64_t index) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    RngStream rng = RngStream::derive(2024, rng_salt::kReference, 2000 + 16 * index + attempt);
    int n = 3 + static_cast<int>(rng.below(18));
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && rng.uniform01() < 0.5) a(i, j) = rng.uniform(-1.0, 1.0);
    double abscissa = spectral_abscissa(a);  // >= 0: the trace is zero
    if (abscissa < 0.3) continue;            // avoid huge rescaling factors
    double decay = rng.uniform(1.0, 2.5);
    double delta = rng.uniform(0.25, 0.7);
    a *= (decay - delta) / abscissa;
    RandomSystem sys;
    sys.coupling = a;
    for (int i = 0; i < n; ++i) sys.nodes.push_back({decay, 0.0});
    return sys;
  }
}

bool criterion_envelope(std::string& detail) {
  auto start = Clock::now();
  int failures = 0;
  double worst_margin = 1.0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    RandomSystem sys = k % 2 == 0 ? random_metzler_system(k) : random_linear_system(k);
    BoundOptions opt;
    opt.trials = 2;
    opt.seed = 3000 + k;
    BoundReport report = check_bound(sys.nodes, sys.coupling, MeasureKind::spectral(), opt);
    if (!(report.guarantee && report.delta > 0.0 && report.all_pass)) ++failures;
    worst_margin = std::min(worst_margin, report.worst_margin);
  }
  double elapsed = seconds_since(start);
  detail = "50 systems (<= 20 nodes), " + std::to_string(failures) +
           " envelope failures, worst margin " + fmt(worst_margin) + ", " + fmt(elapsed) + " s";
  return failures == 0 && elapsed < 60.0;
}

// ---------------------------------------------------------------------------
// 9. Ring of three feed-forward-loop modules: condensed margin is honored by
//    the full simulation; single-channel and general condensed entries agree.

bool criterion_ring_modules(std::string& detail) {
  FflRingSystem ring = ffl_ring_system();
  CondensedSystem cond = condensed_matrix(ring.modules, ring.blocks, MeasureKind::spectral());

  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
  for (int j = 0; j < 3; ++j) expected((j + 1) % 3, j) = 1.0;
  double cond_err = (cond.a_cond - expected).cwiseAbs().maxCoeff();
  bool structure = cond.alpha_min > cond.mu_cond && cond.contracting && cond_err <= 1e-12;

  double siso_err = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j || ring.blocks[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].size() == 0)
        continue;
      const Eigen::MatrixXd& blk = ring.blocks[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      const ModuleSpec& target = ring.modules[static_cast<std::size_t>(i)];
      const ModuleSpec& source = ring.modules[static_cast<std::size_t>(j)];
      double general = induced_norm(target.input_map * blk * source.output_map,
                                    target.resolved_metric(), source.resolved_metric());
      double fast = siso_condensed_entry(blk(0, 0), target.input_map, source.output_map,
                                         target.resolved_metric(), source.resolved_metric());
      siso_err = std::max(siso_err, std::abs(general - fast));
    }

  double dt = 0.9 * max_step(ring.nodes, ring.coupling);
  double min_fit = std::numeric_limits<double>::infinity();
  for (std::uint64_t k = 0; k < 3; ++k) {
    RngStream rng = RngStream::derive(404, rng_salt::kReference, k);
    Eigen::VectorXd xa(9), xb(9);
    for (int i = 0; i < 9; ++i) {
      xa(i) = rng.uniform(-2.0, 2.0);
      xb(i) = rng.uniform(-2.0, 2.0);
    }
    auto pair = simulate(ring.nodes, ring.coupling, xa, xb, 12.0, dt);
    auto fit = fit_rate(pair);
    if (!fit.hit_zero) min_fit = std::min(min_fit, fit.rate);
  }

  detail = "condensed margin " + fmt(cond.margin) + ", slowest fitted rate " + fmt(min_fit) +
           " vs floor " + fmt(0.9 * cond.margin) + ", single-channel mismatch " + fmt(siso_err);
  return structure && cond.margin > 0.0 && min_fit >= 0.9 * cond.margin && siso_err <= 1e-12;
}

// ---------------------------------------------------------------------------
// 10. Planted feed-forward loops are detected as a motif; the 3-cycle is not.

bool criterion_motif_detection(std::string& detail) {
  const auto& stats = planted_zscores();
  const MotifStats* ffl = find_stats(stats, catalog_bits("M2"));
  const MotifStats* cycle = find_stats(stats, catalog_bits("M3"));
  if (ffl == nullptr || cycle == nullptr) {
    detail = "expected classes missing from the scan";
    return false;
  }
  bool ffl_ok = verdict_name(ffl->verdict) == std::string("motif") && ffl->z && *ffl->z > 2.0 &&
                ffl->p_value < 0.01 && ffl->uniqueness >= 4 &&
                (ffl->m_factor_infinite || ffl->m_factor >= 1.1);
  bool cycle_ok = verdict_name(cycle->verdict) == std::string("neither");

  ZscoreOptions opt;
  opt.ensemble_size = 600;
  opt.seed = 17;
  auto rerun = zscores(planted_ffl_network(), 3, opt);
  bool deterministic = rerun.size() == stats.size();
  for (std::size_t i = 0; deterministic && i < stats.size(); ++i)
    deterministic = rerun[i].cls.canon_bits == stats[i].cls.canon_bits &&
                    rerun[i].n_real == stats[i].n_real && rerun[i].z == stats[i].z &&
                    rerun[i].p_value == stats[i].p_value && rerun[i].verdict == stats[i].verdict;

  detail = "feed-forward loop Z " + fmt(ffl->z ? *ffl->z : 0.0) + ", p " + fmt(ffl->p_value) +
           ", uniqueness " + std::to_string(ffl->uniqueness) + "; 3-cycle " +
           verdict_name(cycle->verdict) + "; rerun identical";
  return ffl_ok && cycle_ok && deterministic;
}

// ---------------------------------------------------------------------------
// 11. Overrepresentation anticorrelates with relative loss on the planted
//     network.  (The matching claim on empirical datasets is data-dependent
//     and intentionally not gated here.)

bool criterion_z_vs_loss(std::string& detail) {
  ClossOptions opt;
  opt.samples = 10000;
  opt.seed = 5;
  ClossTable table = closs_table(3, MeasureKind::spectral(), opt);
  ZClossReport report = join_zscore_closs(3, planted_zscores(), table.relative);
  if (!report.spearman) {
    detail = "Spearman undefined (fewer than two defined-r classes)";
    return false;
  }
  detail = "Spearman " + fmt(*report.spearman) + " over " + std::to_string(report.rows.size()) +
           " defined-r classes (empirical-dataset half is data-dependent, not gated)";
  return *report.spearman <= 0.0;
}

// ---------------------------------------------------------------------------
// 12. Byte-identical CLI reports across reruns and thread counts.

std::optional<std::string> run_cli(const std::string& args, const fs::path& dir, int index) {
  fs::path out_file = dir / ("out_" + std::to_string(index) + ".txt");
  std::string cmd = "\"" MOTIFCLOSS_CLI_PATH "\" " + args + " > \"" + out_file.string() +
                    "\" 2> /dev/null";
  int raw = std::system(cmd.c_str());
  if (raw < 0 || !WIFEXITED(raw) || WEXITSTATUS(raw) != 0) return std::nullopt;
  std::ifstream in(out_file, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool criterion_determinism(std::string& detail) {
  fs::path dir = fs::temp_directory_path() / "motifcloss_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  fs::path edges = dir / "planted.edges";
  write_text_file(edges.string(), to_edge_list(planted_ffl_network()));
  FflRingSystem ring = ffl_ring_system();
  DynamicalSystem sys{"ffl_ring", ring.nodes, ring.coupling, ring.graph.labels()};
  fs::path system_file = dir / "ring.json";
  write_text_file(system_file.string(), system_json(sys));

  const std::string in = "--input \"" + edges.string() + "\"";
  const std::vector<std::string> commands = {
      "census " + in + " --n 3 4",
      "closs --n 3 --samples 400 --seed 3",
      "closs --n 3 --samples 400 --seed 3 --format json",
      "motifs " + in + " --n 3 --samples 300 --ensemble 150 --seed 7",
      "condense " + in + " --n 3 --samples 300 --ensemble 150 --seed 9",
      "verify --input \"" + system_file.string() + "\" --trials 2 --seed 5",
  };

  int index = 0;
  int compared = 0;
  for (const auto& cmd : commands) {
    std::optional<std::string> baseline;
    for (const std::string& threads : {" --threads 1", " --threads 1", " --threads 4"}) {
      auto out = run_cli(cmd + threads, dir, index++);
      if (!out) {
        detail = "command failed: " + cmd + threads;
        return false;
      }
      if (!baseline)
        baseline = out;
      else if (*out != *baseline) {
        detail = "output mismatch: " + cmd + threads;
        return false;
      }
      ++compared;
    }
  }
  detail = std::to_string(compared) + " runs over " + std::to_string(commands.size()) +
           " commands, all byte-identical across reruns and thread counts";
  return true;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "class enumeration matches the brute-force oracle", criterion_enumeration},
      {2, "acyclic classes have exactly zero spectral loss", criterion_zero_loss},
      {3, "acyclic motifs are minimal in their density classes", criterion_minimal_in_class},
      {4, "Monte-Carlo means match closed-form expectations", criterion_analytic_means},
      {5, "mean loss is exactly homogeneous in the weight scale", criterion_scale_equivariance},
      {6, "spectral abscissa lower-bounds one/two/infinity measures", criterion_measure_optimality},
      {7, "fitted metrics stay within epsilon of the abscissa", criterion_metric_contract},
      {8, "trajectory pairs honor the contraction envelope", criterion_envelope},
      {9, "module ring: condensed margin holds in full simulation", criterion_ring_modules},
      {10, "planted feed-forward loop detected as a motif", criterion_motif_detection},
      {11, "overrepresentation anticorrelates with relative loss", criterion_z_vs_loss},
      {12, "reports are byte-identical across runs and threads", criterion_determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (!ok) ++failed;
    std::cout << (ok ? "PASS" : "FAIL") << " | " << c.id << ". " << c.name << " — " << detail
              << "\n";
  }
  std::cout << (failed == 0 ? "ACCEPTANCE: all 12 criteria pass"
                            : "ACCEPTANCE: " + std::to_string(failed) + " criteria FAILED")
            << "\n";
  return failed == 0 ? 0 : 1;
}
