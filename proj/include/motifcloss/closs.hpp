#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "motifcloss/census.hpp"
#include "motifcloss/measures.hpp"
#include "motifcloss/parallel.hpp"
#include "motifcloss/rng.hpp"

namespace motifcloss {

struct ClossOptions {
  int samples = 10000;
  double a_max = 1.0;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct SampleStats {
  int samples = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

struct ClossStats {
  SubgraphClass cls;
  std::string measure;
  double a_max = 1.0;
  int samples = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

// Weight matrix with i.i.d. Uniform(0, a_max] entries on the nonzero pattern,
// zeros elsewhere; draws run in row-major pattern order, so the result is a
// pure function of the stream state.
inline Eigen::MatrixXd sample_weights_pattern(const Eigen::MatrixXd& pattern, double a_max,
                                              RngStream& rng) {
  if (!(a_max > 0.0)) throw std::invalid_argument("sample_weights: a_max must be > 0");
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(pattern.rows(), pattern.cols());
  for (Eigen::Index i = 0; i < pattern.rows(); ++i)
    for (Eigen::Index j = 0; j < pattern.cols(); ++j)
      if (pattern(i, j) != 0.0) w(i, j) = a_max * rng.uniform_positive();
  return w;
}

inline Eigen::MatrixXd sample_weights(const SubgraphClass& cls, double a_max, RngStream& rng) {
  return sample_weights_pattern(pattern_matrix(cls.canon_bits, cls.n), a_max, rng);
}

// Stream for Monte-Carlo sample `index`; shared by the estimator and by
// anyone replaying single samples.
inline RngStream closs_sample_stream(std::uint64_t seed, std::int64_t index) {
  return RngStream::derive(seed, rng_salt::kClossSample, static_cast<std::uint64_t>(index));
}

namespace detail {

struct Welford {
  double count = 0.0, mean = 0.0, m2 = 0.0;

  void push(double x) {
    count += 1.0;
    double delta = x - mean;
    mean += delta / count;
    m2 += delta * (x - mean);
  }

  // Chan's pairwise combination; used to fold per-chunk accumulators in a
  // fixed order so results do not depend on the thread count.
  void merge(const Welford& other) {
    if (other.count == 0.0) return;
    if (count == 0.0) {
      *this = other;
      return;
    }
    double total = count + other.count;
    double delta = other.mean - mean;
    mean += delta * other.count / total;
    m2 += other.m2 + delta * delta * count * other.count / total;
    count = total;
  }
};

}  // namespace detail

// Monte-Carlo mean/std of mu(kind, W) over weight matrices W drawn on the
// 0/1 pattern.  Samples are evaluated at unit scale and the statistics are
// scaled by a_max afterwards: matrix measures are positively homogeneous, so
// this is mathematically identity and makes scale equivariance exact in
// floating point as well.
inline SampleStats closs_sample_stats(const Eigen::MatrixXd& pattern, const MeasureKind& kind,
                                      const ClossOptions& options) {
  if (options.samples < 1) throw std::invalid_argument("closs: samples must be >= 1");
  if (!(options.a_max > 0.0)) throw std::invalid_argument("closs: a_max must be > 0");
  detail::require_square_finite(pattern, "closs");

  constexpr std::int64_t kChunk = 256;  // fixed: chunk shapes define the fold order
  const std::int64_t samples = options.samples;
  const std::size_t num_chunks = static_cast<std::size_t>((samples + kChunk - 1) / kChunk);
  std::vector<detail::Welford> acc(num_chunks);

  parallel_chunks(num_chunks, resolve_threads(options.threads), [&](std::size_t c) {
    detail::Welford w;
    const std::int64_t lo = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t hi = std::min(samples, lo + kChunk);
    for (std::int64_t s = lo; s < hi; ++s) {
      RngStream rng = closs_sample_stream(options.seed, s);
      Eigen::MatrixXd weights = sample_weights_pattern(pattern, 1.0, rng);
      w.push(mu(kind, weights));
    }
    acc[c] = w;
  });

  detail::Welford total;
  for (const auto& w : acc) total.merge(w);

  SampleStats stats;
  stats.samples = options.samples;
  stats.mean = options.a_max * total.mean;
  stats.stddev =
      total.count > 1.0 ? options.a_max * std::sqrt(total.m2 / (total.count - 1.0)) : 0.0;
  return stats;
}

inline ClossStats mean_closs(const SubgraphClass& cls, const MeasureKind& kind,
                             const ClossOptions& options = {}) {
  SampleStats s = closs_sample_stats(pattern_matrix(cls.canon_bits, cls.n), kind, options);
  ClossStats stats;
  stats.cls = cls;
  stats.measure = kind.name();
  stats.a_max = options.a_max;
  stats.samples = s.samples;
  stats.mean = s.mean;
  stats.stddev = s.stddev;
  return stats;
}

struct RelativeCloss {
  SubgraphClass cls;
  std::optional<double> r;  // min-max position in the density class, if defined
  double mu_min = 0.0;
  double mu_max = 0.0;
};

// Min-max normalization of mean contraction loss within one density class.
// The class spread is compared against the 10^-3 definedness threshold at
// unit weight scale (the threshold is scale-dependent, so the reference
// scale has to be pinned).
inline std::vector<RelativeCloss> relative_closs(const std::vector<ClossStats>& stats) {
  if (stats.empty()) return {};
  const auto density = stats.front().cls.density_class();
  for (const auto& s : stats) {
    if (s.cls.density_class() != density)
      throw std::invalid_argument("relative_closs: mixed density classes");
    if (s.measure != stats.front().measure || s.a_max != stats.front().a_max ||
        s.samples != stats.front().samples)
      throw std::invalid_argument("relative_closs: mixed estimation configs");
  }

  double lo = stats.front().mean, hi = stats.front().mean;
  for (const auto& s : stats) {
    lo = std::min(lo, s.mean);
    hi = std::max(hi, s.mean);
  }
  const bool defined = (hi - lo) / stats.front().a_max >= 1e-3;

  std::vector<RelativeCloss> out;
  out.reserve(stats.size());
  for (const auto& s : stats) {
    RelativeCloss rc;
    rc.cls = s.cls;
    rc.mu_min = lo;
    rc.mu_max = hi;
    if (defined) rc.r = std::clamp((s.mean - lo) / (hi - lo), 0.0, 1.0);
    out.push_back(rc);
  }
  return out;
}

// Full per-class table for all classes of size n: mean_closs on every class,
// then relative_closs within each density class.  Row order (n, m, mean).
struct ClossTable {
  std::vector<ClossStats> stats;       // aligned
  std::vector<RelativeCloss> relative;
};

inline ClossTable closs_table(int n, const MeasureKind& kind, const ClossOptions& options = {}) {
  ClossTable table;
  for (const auto& cls : enumerate_classes(n)) table.stats.push_back(mean_closs(cls, kind, options));

  table.relative.resize(table.stats.size());
  std::size_t lo = 0;
  while (lo < table.stats.size()) {
    std::size_t hi = lo;
    while (hi < table.stats.size() &&
           table.stats[hi].cls.density_class() == table.stats[lo].cls.density_class())
      ++hi;
    std::vector<ClossStats> group(table.stats.begin() + static_cast<std::ptrdiff_t>(lo),
                                  table.stats.begin() + static_cast<std::ptrdiff_t>(hi));
    auto rel = relative_closs(group);
    for (std::size_t i = lo; i < hi; ++i) table.relative[i] = rel[i - lo];
    lo = hi;
  }

  // Present rows ordered by (n, m, mean); ties keep canon order.
  std::vector<std::size_t> order(table.stats.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = table.stats[a];
    const auto& sb = table.stats[b];
    if (sa.cls.n != sb.cls.n) return sa.cls.n < sb.cls.n;
    if (sa.cls.edge_count != sb.cls.edge_count) return sa.cls.edge_count < sb.cls.edge_count;
    return sa.mean < sb.mean;
  });
  ClossTable sorted;
  for (std::size_t i : order) {
    sorted.stats.push_back(table.stats[i]);
    sorted.relative.push_back(table.relative[i]);
  }
  return sorted;
}

}  // namespace motifcloss
