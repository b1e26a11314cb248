#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "motifcloss/census.hpp"
#include "motifcloss/closs.hpp"
#include "motifcloss/condensation.hpp"
#include "motifcloss/digraph.hpp"
#include "motifcloss/dynamics.hpp"
#include "motifcloss/significance.hpp"
#include "motifcloss/version.hpp"

namespace motifcloss {

using ordered_json = nlohmann::ordered_json;

// Shortest round-trip decimal representation; used everywhere a report holds
// a floating-point value so output is byte-stable across runs.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

// Audit trail carried by every report: tool version, command, and the full
// configuration including the seed.
struct ReportMeta {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;

  void add(const std::string& key, const std::string& value) { config.emplace_back(key, value); }
  void add(const std::string& key, std::int64_t value) { add(key, std::to_string(value)); }
  void add(const std::string& key, double value) { add(key, format_double(value)); }
};

inline std::string csv_header(const ReportMeta& meta) {
  std::string out = "# motifcloss ";
  out += kVersion;
  out += "\n# command=";
  out += meta.command;
  out += "\n";
  for (const auto& [key, value] : meta.config) out += "# " + key + "=" + value + "\n";
  return out;
}

inline ordered_json json_meta(const ReportMeta& meta) {
  ordered_json j;
  j["version"] = kVersion;
  j["command"] = meta.command;
  ordered_json config = ordered_json::object();
  for (const auto& [key, value] : meta.config) config[key] = value;
  j["config"] = config;
  return j;
}

// ---------------------------------------------------------------------------
// Census
// ---------------------------------------------------------------------------

inline std::string census_csv(const std::vector<CensusResult>& results, const ReportMeta& meta) {
  std::string out = csv_header(meta);
  out += "class_id,n,m,count\n";
  for (const auto& result : results)
    for (const auto& cc : result.classes)
      out += cc.cls.id_hex() + "," + std::to_string(cc.cls.n) + "," +
             std::to_string(cc.cls.edge_count) + "," + std::to_string(cc.count) + "\n";
  return out;
}

inline std::string census_json(const std::vector<CensusResult>& results, const ReportMeta& meta) {
  ordered_json j = json_meta(meta);
  j["results"] = ordered_json::array();
  for (const auto& result : results) {
    ordered_json block;
    block["n"] = result.n;
    block["total"] = result.total;
    block["classes"] = ordered_json::array();
    for (const auto& cc : result.classes) {
      ordered_json row;
      row["class_id"] = cc.cls.id_hex();
      row["n"] = cc.cls.n;
      row["m"] = cc.cls.edge_count;
      row["count"] = cc.count;
      block["classes"].push_back(row);
    }
    j["results"].push_back(block);
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Contraction loss
// ---------------------------------------------------------------------------

namespace detail {

inline const RelativeCloss* relative_for(const ClossTable& table, const SubgraphClass& cls) {
  for (const auto& rel : table.relative)
    if (rel.cls.n == cls.n && rel.cls.canon_bits == cls.canon_bits) return &rel;
  return nullptr;
}

}  // namespace detail

inline std::string closs_csv(const std::vector<ClossTable>& tables, const ReportMeta& meta) {
  std::string out = csv_header(meta);
  out += "class_id,n,m,measure,a_max,samples,mean,std,r,motif_catalog_id\n";
  for (const auto& table : tables)
    for (std::size_t i = 0; i < table.stats.size(); ++i) {
      const auto& st = table.stats[i];
      const auto& rel = table.relative[i];
      out += st.cls.id_hex() + "," + std::to_string(st.cls.n) + "," +
             std::to_string(st.cls.edge_count) + "," + st.measure + "," +
             format_double(st.a_max) + "," + std::to_string(st.samples) + "," +
             format_double(st.mean) + "," + format_double(st.stddev) + "," +
             (rel.r ? format_double(*rel.r) : std::string("undefined")) + "," +
             st.cls.motif_id.value_or("") + "\n";
    }
  return out;
}

inline std::string closs_json(const std::vector<ClossTable>& tables, const ReportMeta& meta) {
  ordered_json j = json_meta(meta);
  j["classes"] = ordered_json::array();
  for (const auto& table : tables)
    for (std::size_t i = 0; i < table.stats.size(); ++i) {
      const auto& st = table.stats[i];
      const auto& rel = table.relative[i];
      ordered_json row;
      row["class_id"] = st.cls.id_hex();
      row["n"] = st.cls.n;
      row["m"] = st.cls.edge_count;
      row["measure"] = st.measure;
      row["a_max"] = st.a_max;
      row["samples"] = st.samples;
      row["mean"] = st.mean;
      row["std"] = st.stddev;
      if (rel.r)
        row["r"] = *rel.r;
      else
        row["r"] = nullptr;
      if (st.cls.motif_id) row["motif_catalog_id"] = *st.cls.motif_id;
      j["classes"].push_back(row);
    }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Motif significance
// ---------------------------------------------------------------------------

struct MotifReportBlock {
  int n = 0;
  std::vector<MotifStats> stats;
  SignificanceProfile profile;
  ZClossReport join;
  const ClossTable* closs = nullptr;  // for the r column; may be null
};

inline std::string motifs_csv(const std::vector<MotifReportBlock>& blocks,
                              const ReportMeta& meta) {
  std::string out = csv_header(meta);
  out +=
      "class_id,n,m,N_real,mean_rand,std_rand,Z,Z_normalized,p_value,uniqueness,m_factor,"
      "verdict,r\n";
  for (const auto& block : blocks) {
    for (const auto& s : block.stats) {
      std::string r_text = "undefined";
      if (block.closs != nullptr) {
        const RelativeCloss* rel = detail::relative_for(*block.closs, s.cls);
        if (rel != nullptr && rel->r) r_text = format_double(*rel->r);
      }
      out += s.cls.id_hex() + "," + std::to_string(s.cls.n) + "," +
             std::to_string(s.cls.edge_count) + "," + std::to_string(s.n_real) + "," +
             format_double(s.mean_rand) + "," + format_double(s.std_rand) + "," +
             (s.z ? format_double(*s.z) : std::string("undefined")) + "," +
             format_double(block.profile.value_for(s.cls.canon_bits)) + "," +
             format_double(s.p_value) + "," + std::to_string(s.uniqueness) + "," +
             (s.m_factor_infinite ? std::string("inf") : format_double(s.m_factor)) + "," +
             verdict_name(s.verdict) + "," + r_text + "\n";
    }
    out += "# n=" + std::to_string(block.n) +
           " classes_joined=" + std::to_string(block.join.rows.size()) + " pearson=" +
           (block.join.pearson ? format_double(*block.join.pearson) : std::string("undefined")) +
           " spearman=" +
           (block.join.spearman ? format_double(*block.join.spearman) : std::string("undefined")) +
           "\n";
  }
  return out;
}

inline std::string motifs_json(const std::vector<MotifReportBlock>& blocks,
                               const ReportMeta& meta) {
  ordered_json j = json_meta(meta);
  j["blocks"] = ordered_json::array();
  for (const auto& block : blocks) {
    ordered_json b;
    b["n"] = block.n;
    b["rows"] = ordered_json::array();
    for (const auto& s : block.stats) {
      ordered_json row;
      row["class_id"] = s.cls.id_hex();
      row["n"] = s.cls.n;
      row["m"] = s.cls.edge_count;
      row["N_real"] = s.n_real;
      row["mean_rand"] = s.mean_rand;
      row["std_rand"] = s.std_rand;
      if (s.z)
        row["Z"] = *s.z;
      else
        row["Z"] = nullptr;
      row["Z_normalized"] = block.profile.value_for(s.cls.canon_bits);
      row["p_value"] = s.p_value;
      row["uniqueness"] = s.uniqueness;
      if (s.m_factor_infinite)
        row["m_factor"] = "inf";
      else
        row["m_factor"] = s.m_factor;
      row["verdict"] = verdict_name(s.verdict);
      const RelativeCloss* rel =
          block.closs ? detail::relative_for(*block.closs, s.cls) : nullptr;
      if (rel != nullptr && rel->r)
        row["r"] = *rel->r;
      else
        row["r"] = nullptr;
      b["rows"].push_back(row);
    }
    ordered_json summary;
    summary["classes_joined"] = block.join.rows.size();
    if (block.join.pearson)
      summary["pearson"] = *block.join.pearson;
    else
      summary["pearson"] = nullptr;
    if (block.join.spearman)
      summary["spearman"] = *block.join.spearman;
    else
      summary["spearman"] = nullptr;
    b["summary"] = summary;
    j["blocks"].push_back(b);
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Condensation
// ---------------------------------------------------------------------------

inline std::string condense_json(const CondensationTrace& trace,
                                 const std::vector<ClossHistogram>* histograms,
                                 const ReportMeta& meta) {
  if (histograms != nullptr && histograms->size() != trace.rounds.size())
    throw std::invalid_argument("condense_json: histogram count mismatch");
  ordered_json j = json_meta(meta);
  j["initial"] = {{"nodes", trace.initial.node_count()}, {"edges", trace.initial.edge_count()}};
  j["rounds"] = ordered_json::array();
  for (std::size_t i = 0; i < trace.rounds.size(); ++i) {
    const auto& round = trace.rounds[i];
    ordered_json r;
    r["round"] = round.round;
    r["nodes_before"] = round.nodes_before;
    r["nodes_after"] = round.nodes_after;
    r["motif_classes"] = ordered_json::array();
    for (const auto& s : round.motifs) {
      ordered_json m;
      m["class_id"] = s.cls.id_hex();
      m["n"] = s.cls.n;
      m["N_real"] = s.n_real;
      if (s.z)
        m["Z"] = *s.z;
      else
        m["Z"] = nullptr;
      m["p_value"] = s.p_value;
      m["uniqueness"] = s.uniqueness;
      r["motif_classes"].push_back(m);
    }
    r["condensed"] = ordered_json::array();
    for (const auto& entry : round.condensed) {
      ordered_json c;
      c["class_id"] = entry.cls.id_hex();
      c["n"] = entry.cls.n;
      c["nodes"] = entry.nodes;
      c["supernode"] = entry.supernode;
      r["condensed"].push_back(c);
    }
    r["mapping"] = ordered_json::object();
    for (const auto& [from, to] : round.mapping) r["mapping"][from] = to;
    if (histograms != nullptr) {
      const auto& hist = (*histograms)[i];
      r["histogram"] = {{"bins", hist.bins}, {"undefined", hist.undefined}};
    }
    j["rounds"].push_back(r);
  }
  j["terminal"] = {{"nodes", trace.terminal.node_count()},
                   {"edges", trace.terminal.edge_count()},
                   {"edge_list", to_edge_list(trace.terminal)}};
  j["total_mapping"] = ordered_json::object();
  for (const auto& [from, to] : trace.total_mapping()) j["total_mapping"][from] = to;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Bound verification
// ---------------------------------------------------------------------------

inline std::string verify_json(const BoundReport& report, const ReportMeta& meta) {
  ordered_json j = json_meta(meta);
  j["measure"] = report.measure;
  j["mu_coupling"] = report.mu_coupling;
  j["alpha_min"] = report.alpha_min;
  j["delta"] = report.delta;
  j["guarantee"] = report.guarantee;
  j["verdict"] = report.verdict;
  if (report.guarantee) {
    j["horizon"] = report.horizon;
    j["dt"] = report.dt;
    j["tol"] = report.tol;
    j["trials"] = ordered_json::array();
    for (const auto& t : report.trials)
      j["trials"].push_back({{"worst_margin", t.worst_margin},
                             {"fitted_rate", t.fitted_rate},
                             {"pass", t.pass}});
    j["worst_margin"] = report.worst_margin;
    j["all_pass"] = report.all_pass;
  }
  return j.dump(2) + "\n";
}

inline std::string trajectory_csv(const TrajectoryPair& pair, const ReportMeta& meta) {
  std::string out = csv_header(meta);
  const auto dims = pair.xa.empty() ? 0 : pair.xa.front().size();
  out += "t";
  for (Eigen::Index i = 0; i < dims; ++i) out += ",xa_" + std::to_string(i);
  for (Eigen::Index i = 0; i < dims; ++i) out += ",xb_" + std::to_string(i);
  out += ",distance\n";
  for (std::size_t s = 0; s < pair.times.size(); ++s) {
    out += format_double(pair.times[s]);
    for (Eigen::Index i = 0; i < dims; ++i) out += "," + format_double(pair.xa[s](i));
    for (Eigen::Index i = 0; i < dims; ++i) out += "," + format_double(pair.xb[s](i));
    out += "," + format_double(pair.distance[s]) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dynamical-system JSON (node list + row-major coupling with explicit dims)
// ---------------------------------------------------------------------------

inline ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  auto data = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) data.push_back(m(i, k));
  j["data"] = data;
  return j;
}

inline Eigen::MatrixXd matrix_from_json(const ordered_json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw std::invalid_argument("matrix: need rows, cols, data");
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || !data.is_array() ||
      data.size() != static_cast<std::size_t>(rows * cols))
    throw std::invalid_argument("matrix: data length does not match dimensions");
  Eigen::MatrixXd m(rows, cols);
  std::size_t idx = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = data[idx++].get<double>();
  return m;
}

struct DynamicalSystem {
  std::string name;
  std::vector<TestNode> nodes;
  Eigen::MatrixXd coupling;
  std::vector<std::string> labels;  // optional, aligned with nodes
};

inline std::string system_json(const DynamicalSystem& sys) {
  ordered_json j;
  j["name"] = sys.name;
  j["nodes"] = ordered_json::array();
  for (const auto& n : sys.nodes) j["nodes"].push_back({{"decay", n.decay}, {"gain", n.gain}});
  j["coupling"] = matrix_json(sys.coupling);
  if (!sys.labels.empty()) j["labels"] = sys.labels;
  return j.dump(2) + "\n";
}

inline DynamicalSystem system_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("system: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("nodes") || !j.contains("coupling"))
    throw std::invalid_argument("system: need nodes and coupling");
  DynamicalSystem sys;
  sys.name = j.value("name", std::string());
  for (const auto& node : j.at("nodes")) {
    if (!node.contains("decay") || !node.contains("gain"))
      throw std::invalid_argument("system: node needs decay and gain");
    sys.nodes.push_back(TestNode{node.at("decay").get<double>(), node.at("gain").get<double>()});
  }
  sys.coupling = matrix_from_json(j.at("coupling"));
  if (sys.coupling.rows() != sys.coupling.cols() ||
      sys.coupling.rows() != static_cast<Eigen::Index>(sys.nodes.size()))
    throw std::invalid_argument("system: coupling dimensions do not match the node count");
  if (j.contains("labels")) {
    for (const auto& label : j.at("labels")) sys.labels.push_back(label.get<std::string>());
    if (sys.labels.size() != sys.nodes.size())
      throw std::invalid_argument("system: label count does not match the node count");
  }
  validate_nodes(sys.nodes);
  return sys;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw std::runtime_error("read failed: " + path);
  return content;
}

}  // namespace motifcloss
