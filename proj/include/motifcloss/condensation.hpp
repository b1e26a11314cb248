#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "motifcloss/census.hpp"
#include "motifcloss/closs.hpp"
#include "motifcloss/digraph.hpp"
#include "motifcloss/measures.hpp"
#include "motifcloss/rng.hpp"
#include "motifcloss/significance.hpp"

namespace motifcloss {

// Rate of a module treated as one unit: slowest node rate minus what the
// internal coupling spends, in the chosen measure.  A non-positive result is
// a valid "not contracting as a module" answer, not an error.
inline double module_rate(const std::vector<double>& node_rates, const Eigen::MatrixXd& internal,
                          const MeasureKind& measure) {
  if (node_rates.empty()) throw std::invalid_argument("module_rate: no nodes");
  double lo = std::numeric_limits<double>::infinity();
  for (double r : node_rates) {
    if (!(r > 0.0) || !std::isfinite(r))
      throw std::invalid_argument("module_rate: node rates must be positive and finite");
    lo = std::min(lo, r);
  }
  if (internal.size() == 0) return lo;
  if (internal.rows() != internal.cols() ||
      internal.rows() != static_cast<Eigen::Index>(node_rates.size()))
    throw std::invalid_argument("module_rate: internal matrix dimension mismatch");
  return lo - mu(measure, internal);
}

// One module of an interconnected system: internal coupling, per-node rates,
// and 0/1 selection maps picking which nodes receive inputs (columns of the
// input map) and which nodes are read as outputs (rows of the output map).
// The metric defaults to identity; rate_measure should be the measure in
// which the module's contraction is certified under that metric.
struct ModuleSpec {
  std::string name;
  std::vector<double> node_rates;
  Eigen::MatrixXd internal;    // n x n, or empty for no internal edges
  Eigen::MatrixXd input_map;   // n x inputs
  Eigen::MatrixXd output_map;  // outputs x n
  std::optional<Metric> metric;
  MeasureKind rate_measure = MeasureKind::two();

  int size() const { return static_cast<int>(node_rates.size()); }
  int inputs() const { return static_cast<int>(input_map.cols()); }
  int outputs() const { return static_cast<int>(output_map.rows()); }
  Metric resolved_metric() const { return metric ? *metric : Metric::identity(size()); }
  double rate() const { return module_rate(node_rates, internal, rate_measure); }
};

namespace detail {

inline bool zero_one_entries(const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0 && m(i, j) != 1.0) return false;
  return true;
}

inline void validate_module(const ModuleSpec& m, const std::string& who) {
  if (m.node_rates.empty()) throw std::invalid_argument(who + ": no nodes");
  for (double r : m.node_rates)
    if (!(r > 0.0) || !std::isfinite(r))
      throw std::invalid_argument(who + ": node rates must be positive and finite");
  const auto n = static_cast<Eigen::Index>(m.node_rates.size());
  if (m.internal.size() != 0 && (m.internal.rows() != n || m.internal.cols() != n))
    throw std::invalid_argument(who + ": internal matrix dimension mismatch");
  if (m.internal.size() != 0 && !m.internal.allFinite())
    throw std::invalid_argument(who + ": internal matrix has non-finite entries");
  if (m.input_map.rows() != n) throw std::invalid_argument(who + ": input map row mismatch");
  if (m.output_map.cols() != n) throw std::invalid_argument(who + ": output map column mismatch");
  if (!zero_one_entries(m.input_map) || !zero_one_entries(m.output_map))
    throw std::invalid_argument(who + ": selection maps must have 0/1 entries");
  for (Eigen::Index c = 0; c < m.input_map.cols(); ++c)
    if (m.input_map.col(c).sum() > 1.0)
      throw std::invalid_argument(who + ": input map column selects more than one node");
  for (Eigen::Index r = 0; r < m.output_map.rows(); ++r)
    if (m.output_map.row(r).sum() > 1.0)
      throw std::invalid_argument(who + ": output map row selects more than one node");
  if (m.metric && m.metric->dim() != static_cast<int>(n))
    throw std::invalid_argument(who + ": metric dimension mismatch");
}

}  // namespace detail

// Closed form for a single-input single-output link: the coupled block
// b*a*c has rank one, so its weighted induced norm factors exactly.
inline double siso_condensed_entry(double a, const Eigen::MatrixXd& input_map,
                                   const Eigen::MatrixXd& output_map, const Metric& target_metric,
                                   const Metric& source_metric) {
  if (input_map.cols() != 1 || output_map.rows() != 1)
    throw std::invalid_argument("siso_condensed_entry: maps are not single-channel");
  return std::abs(a) * (target_metric.sqrt() * input_map).norm() *
         (output_map * source_metric.inverse_sqrt()).norm();
}

struct CondensedSystem {
  std::vector<ModuleSpec> modules;
  std::vector<double> rates;  // per-module rates, all > 0 (admissibility enforced)
  Eigen::MatrixXd a_cond;     // non-negative, zero diagonal
  std::string measure;        // measure applied to a_cond for the verdict
  double alpha_min = 0.0;
  double mu_cond = 0.0;
  double margin = 0.0;  // alpha_min - mu_cond
  bool contracting = false;
};

// Condense an interconnected module system to one node per module: entry
// (i,j) is the metric-weighted induced norm of the block through which module
// j drives module i.  Verdict: the slowest module rate must exceed the
// measure of the condensed matrix.
inline CondensedSystem condensed_matrix(const std::vector<ModuleSpec>& modules,
                                        const std::vector<std::vector<Eigen::MatrixXd>>& blocks,
                                        const MeasureKind& cond_measure = MeasureKind::spectral()) {
  const std::size_t count = modules.size();
  if (count == 0) throw std::invalid_argument("condensed_matrix: no modules");
  if (blocks.size() != count)
    throw std::invalid_argument("condensed_matrix: block grid row count mismatch");
  for (const auto& row : blocks)
    if (row.size() != count)
      throw std::invalid_argument("condensed_matrix: block grid column count mismatch");

  CondensedSystem sys;
  sys.modules = modules;
  sys.measure = cond_measure.name();
  std::vector<Metric> metrics;
  metrics.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string who = modules[i].name.empty() ? "module " + std::to_string(i)
                                              : "module '" + modules[i].name + "'";
    detail::validate_module(modules[i], who);
    double rate = modules[i].rate();
    if (!(rate > 0.0)) {
      std::ostringstream msg;
      msg << "condensed_matrix: " << who << " is not admissible (rate " << rate << " <= 0)";
      throw std::invalid_argument(msg.str());
    }
    sys.rates.push_back(rate);
    metrics.push_back(modules[i].resolved_metric());
  }

  const auto n = static_cast<Eigen::Index>(count);
  sys.a_cond = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < count; ++j) {
      const Eigen::MatrixXd& blk = blocks[i][j];
      if (blk.size() == 0) continue;
      if (i == j) {
        if (blk.cwiseAbs().maxCoeff() != 0.0)
          throw std::invalid_argument("condensed_matrix: nonzero self-coupling block");
        continue;
      }
      if (blk.rows() != modules[i].inputs() || blk.cols() != modules[j].outputs())
        throw std::invalid_argument("condensed_matrix: block dimension mismatch at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
      if (!blk.allFinite())
        throw std::invalid_argument("condensed_matrix: non-finite block entries");
      Eigen::MatrixXd lifted = modules[i].input_map * blk * modules[j].output_map;
      double entry = induced_norm(lifted, metrics[i], metrics[j]);
      if (blk.rows() == 1 && blk.cols() == 1) {
        double fast = siso_condensed_entry(blk(0, 0), modules[i].input_map,
                                           modules[j].output_map, metrics[i], metrics[j]);
        if (std::abs(fast - entry) > 1e-9 * std::max(1.0, entry))
          throw std::logic_error("condensed_matrix: single-channel closed form disagrees "
                                 "with the general path");
      }
      sys.a_cond(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = entry;
    }
  }

  sys.alpha_min = *std::min_element(sys.rates.begin(), sys.rates.end());
  sys.mu_cond = mu(cond_measure, sys.a_cond);
  sys.margin = sys.alpha_min - sys.mu_cond;
  sys.contracting = sys.margin > 0.0;
  return sys;
}

// Node-level coupling matrix of the interconnected system: internal blocks on
// the diagonal, input_map * block * output_map elsewhere.
inline Eigen::MatrixXd full_coupling(const std::vector<ModuleSpec>& modules,
                                     const std::vector<std::vector<Eigen::MatrixXd>>& blocks) {
  const std::size_t count = modules.size();
  if (count == 0) throw std::invalid_argument("full_coupling: no modules");
  if (blocks.size() != count) throw std::invalid_argument("full_coupling: block grid mismatch");
  std::vector<Eigen::Index> offset(count + 1, 0);
  for (std::size_t i = 0; i < count; ++i) {
    detail::validate_module(modules[i], "module " + std::to_string(i));
    offset[i + 1] = offset[i] + modules[i].size();
  }
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(offset[count], offset[count]);
  for (std::size_t i = 0; i < count; ++i) {
    if (modules[i].internal.size() != 0)
      full.block(offset[i], offset[i], modules[i].size(), modules[i].size()) =
          modules[i].internal;
    if (blocks[i].size() != count)
      throw std::invalid_argument("full_coupling: block grid mismatch");
    for (std::size_t j = 0; j < count; ++j) {
      const Eigen::MatrixXd& blk = blocks[i][j];
      if (blk.size() == 0 || i == j) continue;
      if (blk.rows() != modules[i].inputs() || blk.cols() != modules[j].outputs())
        throw std::invalid_argument("full_coupling: block dimension mismatch");
      full.block(offset[i], offset[j], modules[i].size(), modules[j].size()) =
          modules[i].input_map * blk * modules[j].output_map;
    }
  }
  return full;
}

struct CondensationRound {
  struct Condensed {
    SubgraphClass cls;
    double z = 0.0;                  // class Z-score in the round that selected it
    std::vector<std::string> nodes;  // member labels, lexicographically sorted
    std::string supernode;
  };

  int round = 0;  // 1-based
  std::vector<MotifStats> motifs;  // classes with verdict == motif this round
  std::vector<Condensed> condensed;
  std::map<std::string, std::string> mapping;  // condensed node -> supernode
  int nodes_before = 0;
  int nodes_after = 0;
};

struct CondensationTrace {
  Digraph initial;
  std::vector<CondensationRound> rounds;
  Digraph terminal;

  // Composition of all per-round mappings: every original label maps to the
  // label that carries it in the terminal graph.
  std::map<std::string, std::string> total_mapping() const {
    std::map<std::string, std::string> total;
    for (const auto& label : initial.labels()) total[label] = label;
    for (const auto& round : rounds)
      for (auto& [origin, current] : total) {
        auto hit = round.mapping.find(current);
        if (hit != round.mapping.end()) current = hit->second;
      }
    return total;
  }
};

struct CondenseOptions {
  ZscoreOptions significance;
  std::vector<int> sizes{3, 4};
  int max_rounds = 32;
};

// Recursive condensation: find motif classes, contract a greedy maximal set
// of node-disjoint occurrences (strongest Z first) into supernodes, repeat on
// the coarser graph with a fresh randomization ensemble until no motif
// remains.  Edge weights are dropped; duplicate edges between supernodes
// collapse and intra-occurrence edges vanish.
inline CondensationTrace condense_motifs(const Digraph& g, const CondenseOptions& options = {}) {
  if (options.sizes.empty()) throw std::invalid_argument("condense_motifs: empty size set");
  for (int n : options.sizes)
    if (n < 3 || n > 4) throw std::invalid_argument("condense_motifs: sizes must be 3 or 4");
  if (options.max_rounds < 1) throw std::invalid_argument("condense_motifs: max_rounds < 1");

  CondensationTrace trace;
  trace.initial = g;
  Digraph current = g;

  for (int round = 1; round <= options.max_rounds; ++round) {
    CondensationRound record;
    record.round = round;
    record.nodes_before = current.node_count();

    struct Candidate {
      double z;
      SubgraphClass cls;
      std::vector<std::string> nodes;
    };
    std::vector<Candidate> candidates;
    for (int n : options.sizes) {
      if (current.node_count() < n) continue;
      ZscoreOptions stage = options.significance;
      stage.seed = RngStream::derive(options.significance.seed, rng_salt::kCondenseRound,
                                     (static_cast<std::uint64_t>(round) << 3) |
                                         static_cast<std::uint64_t>(n))
                       .next();
      auto stats = zscores(current, n, stage);
      std::vector<const MotifStats*> motifs;
      for (const auto& s : stats)
        if (s.verdict == MotifStats::Verdict::motif) motifs.push_back(&s);
      if (motifs.empty()) continue;
      CensusOptions census_options;
      census_options.threads = options.significance.threads;
      census_options.occurrence_cap = options.significance.occurrence_cap;
      auto cen = census(current, n, census_options);
      for (const auto* s : motifs) {
        record.motifs.push_back(*s);
        const ClassCount* cc = cen.find(s->cls.canon_bits);
        if (cc == nullptr) throw std::logic_error("condense_motifs: motif class lost by census");
        for (const auto& occurrence : cc->occurrences) {
          Candidate cand;
          cand.z = s->z.value();
          cand.cls = s->cls;
          for (int id : occurrence) cand.nodes.push_back(current.label(id));
          std::sort(cand.nodes.begin(), cand.nodes.end());
          candidates.push_back(std::move(cand));
        }
      }
    }
    if (candidates.empty()) break;

    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.z != b.z) return a.z > b.z;
      if (!(a.cls == b.cls)) return a.cls < b.cls;
      return a.nodes < b.nodes;
    });
    std::set<std::string> taken;
    std::vector<const Candidate*> selected;
    for (const auto& cand : candidates) {
      bool clash = false;
      for (const auto& label : cand.nodes) clash = clash || taken.count(label) > 0;
      if (clash) continue;
      for (const auto& label : cand.nodes) taken.insert(label);
      selected.push_back(&cand);
    }
    if (selected.empty()) break;

    std::set<std::string> survivor_labels;
    for (const auto& label : current.labels())
      if (taken.count(label) == 0) survivor_labels.insert(label);
    for (std::size_t idx = 0; idx < selected.size(); ++idx) {
      std::string supernode = "m" + std::to_string(round) + "_" + std::to_string(idx);
      while (survivor_labels.count(supernode) > 0) supernode += "x";
      survivor_labels.insert(supernode);
      CondensationRound::Condensed entry;
      entry.cls = selected[idx]->cls;
      entry.z = selected[idx]->z;
      entry.nodes = selected[idx]->nodes;
      entry.supernode = supernode;
      for (const auto& label : entry.nodes) record.mapping[label] = supernode;
      record.condensed.push_back(std::move(entry));
    }

    Digraph next;
    for (const auto& label : current.labels())
      if (record.mapping.count(label) == 0) next.add_node(label);
    for (const auto& entry : record.condensed) next.add_node(entry.supernode);
    for (const auto& [u, v] : current.edges()) {
      auto map_label = [&](int id) {
        const std::string& label = current.label(id);
        auto hit = record.mapping.find(label);
        return hit == record.mapping.end() ? label : hit->second;
      };
      std::string mu_label = map_label(u), mv_label = map_label(v);
      if (mu_label == mv_label) continue;
      int a = next.add_node(mu_label), b = next.add_node(mv_label);
      if (!next.has_edge(a, b)) next.add_edge(a, b);
    }

    record.nodes_after = next.node_count();
    if (record.nodes_after >= record.nodes_before)
      throw std::logic_error("condense_motifs: node count failed to decrease");
    trace.rounds.push_back(std::move(record));
    current = std::move(next);
  }

  trace.terminal = current;
  return trace;
}

struct ClossHistogram {
  std::array<std::int64_t, 5> bins{};  // [0,.2) [.2,.4) [.4,.6) [.6,.8) [.8,1]
  std::int64_t undefined = 0;
};

// Tally the condensed occurrences of each round by the relative contraction
// loss of their class.
inline std::vector<ClossHistogram> closs_histogram(const CondensationTrace& trace,
                                                   const std::vector<ClossTable>& tables) {
  std::map<std::pair<int, std::uint16_t>, std::optional<double>> lookup;
  for (const auto& table : tables)
    for (const auto& rel : table.relative) lookup[{rel.cls.n, rel.cls.canon_bits}] = rel.r;

  std::vector<ClossHistogram> out;
  for (const auto& round : trace.rounds) {
    ClossHistogram hist;
    for (const auto& entry : round.condensed) {
      auto hit = lookup.find({entry.cls.n, entry.cls.canon_bits});
      if (hit == lookup.end())
        throw std::invalid_argument("closs_histogram: loss table missing class " +
                                    entry.cls.id_hex());
      if (!hit->second.has_value()) {
        ++hist.undefined;
        continue;
      }
      double r = *hit->second;
      int bin = r >= 0.8 ? 4 : static_cast<int>(r / 0.2);
      ++hist.bins[static_cast<std::size_t>(std::clamp(bin, 0, 4))];
    }
    out.push_back(hist);
  }
  return out;
}

}  // namespace motifcloss
