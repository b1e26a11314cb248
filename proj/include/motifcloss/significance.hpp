#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "motifcloss/census.hpp"
#include "motifcloss/closs.hpp"
#include "motifcloss/digraph.hpp"
#include "motifcloss/parallel.hpp"
#include "motifcloss/rng.hpp"

namespace motifcloss {

// Classification thresholds: over-representation P-value, minimum number of
// disjoint occurrences, and minimum abundance ratio versus the null model.
inline constexpr double kMotifPThreshold = 0.01;
inline constexpr int kUniquenessMin = 4;
inline constexpr double kMFactorMin = 1.1;

struct MotifStats {
  enum class Tail { over, under };
  enum class Verdict { motif, anti_motif, neither };

  SubgraphClass cls;
  std::int64_t n_real = 0;
  double mean_rand = 0.0;
  double std_rand = 0.0;
  std::optional<double> z;  // undefined when the null counts do not vary
  double p_over = 1.0;      // smoothed upper-tail empirical P-value
  double p_under = 1.0;     // smoothed lower-tail
  double p_value = 1.0;     // the smaller tail, direction in `tail`
  Tail tail = Tail::over;
  int uniqueness = 0;       // greedy max node-disjoint occurrences
  double m_factor = 0.0;    // n_real / mean_rand
  bool m_factor_infinite = false;  // mean_rand == 0 with n_real > 0
  Verdict verdict = Verdict::neither;
};

inline const char* verdict_name(MotifStats::Verdict v) {
  switch (v) {
    case MotifStats::Verdict::motif: return "motif";
    case MotifStats::Verdict::anti_motif: return "anti-motif";
    case MotifStats::Verdict::neither: return "neither";
  }
  return "?";
}

struct ZscoreOptions {
  int ensemble_size = 1000;
  int swap_factor = 100;
  std::uint64_t seed = 0;
  int threads = 1;
  std::size_t occurrence_cap = 1'000'000;
};

namespace detail {

// Greedy maximum set of pairwise node-disjoint occurrences, processed in
// lexicographic order for determinism.
inline int greedy_disjoint(std::vector<std::vector<int>> occurrences, int num_nodes) {
  std::sort(occurrences.begin(), occurrences.end());
  std::vector<char> used(static_cast<std::size_t>(num_nodes), 0);
  int taken = 0;
  for (const auto& occ : occurrences) {
    bool free = true;
    for (int v : occ)
      if (used[static_cast<std::size_t>(v)]) {
        free = false;
        break;
      }
    if (!free) continue;
    for (int v : occ) used[static_cast<std::size_t>(v)] = 1;
    ++taken;
  }
  return taken;
}

}  // namespace detail

// Z-scores, empirical P-values, uniqueness, abundance ratio, and the
// motif/anti-motif verdict for every n-node class present in the graph or in
// its degree-preserving randomization ensemble.  Classes absent everywhere
// are omitted.  Rows come back in (edge count, canon_bits) order.
inline std::vector<MotifStats> zscores(const Digraph& g, int n, const ZscoreOptions& options = {}) {
  if (options.ensemble_size < 2)
    throw std::invalid_argument("zscores: ensemble_size must be >= 2");

  CensusOptions census_options;
  census_options.occurrence_cap = options.occurrence_cap;
  census_options.threads = options.threads;
  CensusResult real = census(g, n, census_options);

  const DegreeSignature signature = DegreeSignature::of(g);
  const std::size_t ensemble = static_cast<std::size_t>(options.ensemble_size);
  std::vector<std::map<std::uint16_t, std::int64_t>> member_counts(ensemble);

  parallel_chunks(ensemble, resolve_threads(options.threads), [&](std::size_t k) {
    std::uint64_t member_seed =
        RngStream::derive(options.seed, rng_salt::kEnsembleMember, k).next();
    RandomizeResult shuffled = randomize(g, member_seed, options.swap_factor);
    if (!(DegreeSignature::of(shuffled.graph) == signature))
      throw std::logic_error("zscores: randomization broke the degree signature");
    CensusOptions member_options;
    member_options.occurrence_cap = 0;  // counts only
    member_options.threads = 1;
    CensusResult member = census(shuffled.graph, n, member_options);
    auto& slot = member_counts[k];
    for (const auto& cc : member.classes) slot[cc.cls.canon_bits] = cc.count;
  });

  std::set<std::uint16_t> seen;
  for (const auto& cc : real.classes) seen.insert(cc.cls.canon_bits);
  for (const auto& slot : member_counts)
    for (const auto& [canon, count] : slot) seen.insert(canon);

  std::vector<MotifStats> out;
  for (std::uint16_t canon : seen) {
    MotifStats s;
    s.cls = canonical_form(canon, n);
    const ClassCount* cc = real.find(canon);
    s.n_real = cc ? cc->count : 0;

    double sum = 0.0;
    std::int64_t ge = 0, le = 0;
    for (const auto& slot : member_counts) {
      auto it = slot.find(canon);
      std::int64_t c = it == slot.end() ? 0 : it->second;
      sum += static_cast<double>(c);
      if (c >= s.n_real) ++ge;
      if (c <= s.n_real) ++le;
    }
    const double e = static_cast<double>(ensemble);
    s.mean_rand = sum / e;
    double ss = 0.0;
    for (const auto& slot : member_counts) {
      auto it = slot.find(canon);
      double c = it == slot.end() ? 0.0 : static_cast<double>(it->second);
      ss += (c - s.mean_rand) * (c - s.mean_rand);
    }
    s.std_rand = std::sqrt(ss / (e - 1.0));
    if (s.std_rand > 0.0) s.z = (static_cast<double>(s.n_real) - s.mean_rand) / s.std_rand;

    s.p_over = (1.0 + static_cast<double>(ge)) / (1.0 + e);
    s.p_under = (1.0 + static_cast<double>(le)) / (1.0 + e);
    if (s.p_over <= s.p_under) {
      s.p_value = s.p_over;
      s.tail = MotifStats::Tail::over;
    } else {
      s.p_value = s.p_under;
      s.tail = MotifStats::Tail::under;
    }

    s.uniqueness = cc ? detail::greedy_disjoint(cc->occurrences, g.node_count()) : 0;

    if (s.mean_rand > 0.0) {
      s.m_factor = static_cast<double>(s.n_real) / s.mean_rand;
    } else if (s.n_real > 0) {
      s.m_factor_infinite = true;
      s.m_factor = std::numeric_limits<double>::infinity();
    }

    const bool m_ok = s.m_factor_infinite || s.m_factor >= kMFactorMin;
    if (s.z && *s.z > 0.0 && s.p_over < kMotifPThreshold && s.uniqueness >= kUniquenessMin &&
        m_ok) {
      s.verdict = MotifStats::Verdict::motif;
    } else if (s.z && *s.z < 0.0 && s.p_under < kMotifPThreshold && !s.m_factor_infinite &&
               s.m_factor <= 1.0 / kMFactorMin) {
      // Mirrored thresholds; uniqueness is waived for absence-based verdicts.
      s.verdict = MotifStats::Verdict::anti_motif;
    }
    out.push_back(std::move(s));
  }

  std::sort(out.begin(), out.end(),
            [](const MotifStats& a, const MotifStats& b) { return a.cls < b.cls; });
  return out;
}

// Per-class Z vector over all classes of size n, scaled to unit Euclidean
// length.  Undefined or absent Z contributes zero.
struct SignificanceProfile {
  int n = 0;
  std::vector<double> values;  // aligned with enumerate_classes(n)
  double raw_norm = 0.0;
  bool all_zero = true;

  double value_for(std::uint16_t canon_bits) const {
    const auto& classes = enumerate_classes(n);
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i].canon_bits == canon_bits) return values[i];
    throw std::invalid_argument("significance profile: unknown class");
  }
};

inline SignificanceProfile significance_profile(int n, const std::vector<MotifStats>& stats) {
  const auto& classes = enumerate_classes(n);
  SignificanceProfile profile;
  profile.n = n;
  profile.values.assign(classes.size(), 0.0);
  for (const auto& s : stats) {
    if (s.cls.n != n) throw std::invalid_argument("significance_profile: mixed sizes");
    if (!s.z) continue;
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i].canon_bits == s.cls.canon_bits) {
        profile.values[i] = *s.z;
        break;
      }
  }
  double ss = 0.0;
  for (double v : profile.values) ss += v * v;
  profile.raw_norm = std::sqrt(ss);
  if (profile.raw_norm > 0.0) {
    for (double& v : profile.values) v /= profile.raw_norm;
    profile.all_zero = false;
  }
  return profile;
}

inline std::optional<double> pearson_correlation(const std::vector<double>& x,
                                                 const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

inline std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

inline std::optional<double> spearman_correlation(const std::vector<double>& x,
                                                  const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  return pearson_correlation(average_ranks(x), average_ranks(y));
}

struct ZClossRow {
  SubgraphClass cls;
  double z_normalized = 0.0;
  double r = 0.0;
};

struct ZClossReport {
  std::vector<ZClossRow> rows;  // classes with both Z and r defined
  std::optional<double> pearson;
  std::optional<double> spearman;
};

// Joins the normalized significance profile with relative contraction loss.
// Classes whose r is undefined (flat density class) or whose Z is undefined
// are dropped from the comparison.
inline ZClossReport join_zscore_closs(int n, const std::vector<MotifStats>& stats,
                                      const std::vector<RelativeCloss>& closs) {
  std::map<std::uint16_t, const RelativeCloss*> by_canon;
  for (const auto& rc : closs)
    if (rc.cls.n == n) by_canon[rc.cls.canon_bits] = &rc;
  for (const auto& cls : enumerate_classes(n))
    if (!by_canon.count(cls.canon_bits))
      throw std::invalid_argument("zscore_vs_closs: contraction-loss table does not cover class " +
                                  cls.id_hex());

  SignificanceProfile profile = significance_profile(n, stats);
  std::map<std::uint16_t, const MotifStats*> stat_by_canon;
  for (const auto& s : stats) stat_by_canon[s.cls.canon_bits] = &s;

  ZClossReport report;
  std::vector<double> zs, rs;
  for (const auto& cls : enumerate_classes(n)) {
    auto st = stat_by_canon.find(cls.canon_bits);
    if (st == stat_by_canon.end() || !st->second->z) continue;
    const RelativeCloss* rc = by_canon[cls.canon_bits];
    if (!rc->r) continue;
    ZClossRow row;
    row.cls = cls;
    row.z_normalized = profile.value_for(cls.canon_bits);
    row.r = *rc->r;
    report.rows.push_back(row);
    zs.push_back(row.z_normalized);
    rs.push_back(row.r);
  }
  report.pearson = pearson_correlation(zs, rs);
  report.spearman = spearman_correlation(zs, rs);
  return report;
}

inline ZClossReport zscore_vs_closs(const Digraph& g, int n,
                                    const std::vector<RelativeCloss>& closs,
                                    const ZscoreOptions& options = {}) {
  return join_zscore_closs(n, zscores(g, n, options), closs);
}

}  // namespace motifcloss
