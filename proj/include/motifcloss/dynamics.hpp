#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "motifcloss/measures.hpp"
#include "motifcloss/parallel.hpp"
#include "motifcloss/rng.hpp"

namespace motifcloss {

// Scalar node dx/dt = -decay*x + gain*sin(x) + u with |gain| < decay, so the
// node Jacobian -decay + gain*cos(x) stays below -(decay - |gain|): a node
// with an analytically known contraction rate.
struct TestNode {
  double decay = 1.0;
  double gain = 0.0;

  double rate() const { return decay - std::abs(gain); }
};

inline void validate_nodes(const std::vector<TestNode>& nodes) {
  if (nodes.empty()) throw std::invalid_argument("nodes: empty system");
  for (const auto& n : nodes)
    if (!(std::abs(n.gain) < n.decay) || !std::isfinite(n.decay) || !std::isfinite(n.gain))
      throw std::invalid_argument("nodes: need |gain| < decay (finite)");
}

// Vector norm used for trajectory distances.  `matching` pairs each matrix
// measure with the norm in which that measure certifies contraction
// (column sums -> l1, row sums -> linf, two -> l2, weighted/spectral -> P).
class DistanceNorm {
 public:
  enum class Kind { l1, l2, linf, weighted };

  static DistanceNorm euclidean() { return DistanceNorm(Kind::l2); }
  static DistanceNorm one() { return DistanceNorm(Kind::l1); }
  static DistanceNorm infinity() { return DistanceNorm(Kind::linf); }
  static DistanceNorm in_metric(Metric m) {
    DistanceNorm n(Kind::weighted);
    n.metric_ = std::move(m);
    return n;
  }

  double operator()(const Eigen::VectorXd& v) const {
    switch (kind_) {
      case Kind::l1: return v.lpNorm<1>();
      case Kind::l2: return v.norm();
      case Kind::linf: return v.lpNorm<Eigen::Infinity>();
      case Kind::weighted: return metric_->norm(v);
    }
    return 0.0;
  }

  Kind kind() const { return kind_; }

 private:
  explicit DistanceNorm(Kind kind) : kind_(kind) {}
  Kind kind_;
  std::optional<Metric> metric_;
};

struct TrajectoryPair {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> xa, xb;
  std::vector<double> distance;
  bool diverged = false;  // non-finite state reached; series truncated there
};

// Step-size guard: 0.1 / (stiffest node + an easily computed bound on the
// coupling spectrum).
inline double max_step(const std::vector<TestNode>& nodes, const Eigen::MatrixXd& coupling) {
  double node_l = 0.0;
  for (const auto& n : nodes) node_l = std::max(node_l, n.decay + std::abs(n.gain));
  double coupling_l = coupling.size() > 0 ? coupling.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
  return 0.1 / std::max(1e-12, node_l + coupling_l);
}

// Classical fixed-step RK4 for the pair of trajectories of
// dx_i/dt = -c_i x_i + d_i sin(x_i) + (A x)_i from two initial conditions.
inline TrajectoryPair simulate(const std::vector<TestNode>& nodes,
                               const Eigen::MatrixXd& coupling, const Eigen::VectorXd& xa0,
                               const Eigen::VectorXd& xb0, double horizon, double dt,
                               const DistanceNorm& norm = DistanceNorm::euclidean()) {
  validate_nodes(nodes);
  const Eigen::Index n = static_cast<Eigen::Index>(nodes.size());
  if (coupling.rows() != n || coupling.cols() != n)
    throw std::invalid_argument("simulate: coupling dimension mismatch");
  if (xa0.size() != n || xb0.size() != n)
    throw std::invalid_argument("simulate: initial condition dimension mismatch");
  if (!(dt > 0.0) || !(horizon >= dt)) throw std::invalid_argument("simulate: need 0 < dt <= T");
  if (dt > max_step(nodes, coupling))
    throw std::invalid_argument("simulate: dt violates the step-size guard");

  auto f = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd out = coupling * x;
    for (Eigen::Index i = 0; i < n; ++i)
      out(i) += -nodes[static_cast<std::size_t>(i)].decay * x(i) +
                nodes[static_cast<std::size_t>(i)].gain * std::sin(x(i));
    return out;
  };
  auto rk4 = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd k1 = f(x);
    Eigen::VectorXd k2 = f(x + 0.5 * dt * k1);
    Eigen::VectorXd k3 = f(x + 0.5 * dt * k2);
    Eigen::VectorXd k4 = f(x + dt * k3);
    return (x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).eval();
  };

  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  TrajectoryPair pair;
  pair.dt = dt;
  pair.times.reserve(steps + 1);
  pair.xa.reserve(steps + 1);
  pair.xb.reserve(steps + 1);
  Eigen::VectorXd a = xa0, b = xb0;
  for (std::size_t s = 0; s <= steps; ++s) {
    if (!a.allFinite() || !b.allFinite()) {
      pair.diverged = true;
      break;
    }
    pair.times.push_back(static_cast<double>(s) * dt);
    pair.xa.push_back(a);
    pair.xb.push_back(b);
    pair.distance.push_back(norm(a - b));
    if (s < steps) {
      a = rk4(a);
      b = rk4(b);
    }
  }
  return pair;
}

struct RateFit {
  double rate = 0.0;
  bool hit_zero = false;  // distance reached zero/negative; rate reported as +inf
  int points = 0;
};

// Least-squares slope of log-distance over the trailing `window` fraction of
// the horizon; returns the negated slope (positive = decay).
inline RateFit fit_rate(const TrajectoryPair& pair, double window = 0.5) {
  if (!(window > 0.0) || window > 1.0)
    throw std::invalid_argument("fit_rate: window must be in (0, 1]");
  if (pair.times.empty()) throw std::invalid_argument("fit_rate: empty trajectory");
  const double t_end = pair.times.back();
  const double t_start = t_end - window * (t_end - pair.times.front());
  std::vector<double> ts, ys;
  RateFit fit;
  for (std::size_t i = 0; i < pair.times.size(); ++i) {
    if (pair.times[i] < t_start) continue;
    if (!(pair.distance[i] > 0.0)) {
      fit.hit_zero = true;
      fit.rate = std::numeric_limits<double>::infinity();
      return fit;
    }
    ts.push_back(pair.times[i]);
    ys.push_back(std::log(pair.distance[i]));
  }
  if (ts.size() < 10) throw std::invalid_argument("fit_rate: fewer than 10 points in window");
  double n = static_cast<double>(ts.size()), st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += ys[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * ys[i];
  }
  double denom = n * stt - st * st;
  fit.rate = -(n * sty - st * sy) / denom;
  fit.points = static_cast<int>(ts.size());
  return fit;
}

struct BoundTrial {
  double worst_margin = 1.0;  // min over time of 1 - distance/envelope
  double fitted_rate = 0.0;
  bool pass = false;
};

struct BoundReport {
  std::string measure;
  double mu_coupling = 0.0;
  double alpha_min = 0.0;
  double delta = 0.0;  // alpha_min - mu(measure, coupling)
  bool guarantee = false;
  std::string verdict;  // "contracting (bound verified)" / "contracting (bound violated)" / "no guarantee"
  double horizon = 0.0;
  double dt = 0.0;
  double tol = 0.05;
  std::vector<BoundTrial> trials;
  double worst_margin = 1.0;
  bool all_pass = true;
};

struct BoundOptions {
  int trials = 8;
  std::uint64_t seed = 0;
  double tol = 0.05;        // envelope slack fraction
  double horizon = 0.0;     // 0 = auto
  double dt = 0.0;          // 0 = auto (90% of the step guard)
  double ic_scale = 2.0;    // initial conditions uniform in [-scale, scale]
  double metric_epsilon = 1e-6;
};

// Executable form of the measure bound: predicted rate
// delta = min node rate - mu(measure, A), checked as the pointwise envelope
// distance(t) <= distance(0) * exp(-delta*(1-tol)*t) on random trajectory
// pairs, in the norm matching the measure.  The matched norm matters twice:
// it makes the coupling term contribute at most mu(measure, A), and it must
// also not amplify the heterogeneous node diagonal.  The latter holds
// unconditionally for the unweighted norms and for diagonal metrics (the
// Perron metric of irreducible Metzler couplings); a dense Lyapunov metric
// certifies the bound only when the node rates are uniform.  delta <= 0
// yields verdict "no guarantee" -- the bound is sufficient, not necessary.
inline BoundReport check_bound(const std::vector<TestNode>& nodes,
                               const Eigen::MatrixXd& coupling,
                               const MeasureKind& measure = MeasureKind::spectral(),
                               const BoundOptions& options = {}) {
  validate_nodes(nodes);
  if (coupling.rows() != static_cast<Eigen::Index>(nodes.size()) ||
      coupling.rows() != coupling.cols())
    throw std::invalid_argument("check_bound: coupling dimension mismatch");
  if (options.trials < 1) throw std::invalid_argument("check_bound: trials must be >= 1");

  BoundReport report;
  report.measure = measure.name();
  report.tol = options.tol;
  report.mu_coupling = mu(measure, coupling);
  report.alpha_min = nodes.front().rate();
  for (const auto& n : nodes) report.alpha_min = std::min(report.alpha_min, n.rate());
  report.delta = report.alpha_min - report.mu_coupling;
  report.guarantee = report.delta > 0.0;
  if (!report.guarantee) {
    report.verdict = "no guarantee";
    return report;
  }

  DistanceNorm norm = [&] {
    switch (measure.tag()) {
      case MeasureTag::one: return DistanceNorm::one();
      case MeasureTag::infinity_: return DistanceNorm::infinity();
      case MeasureTag::two: return DistanceNorm::euclidean();
      case MeasureTag::weighted_two: return DistanceNorm::in_metric(measure.metric());
      case MeasureTag::spectral:
        return DistanceNorm::in_metric(metric_for(coupling, options.metric_epsilon));
    }
    return DistanceNorm::euclidean();
  }();

  report.dt = options.dt > 0.0 ? options.dt : 0.9 * max_step(nodes, coupling);
  report.horizon =
      options.horizon > 0.0 ? options.horizon : std::clamp(4.0 / report.delta, 1.0, 100.0);
  if (report.horizon < 20.0 * report.dt) report.horizon = 20.0 * report.dt;

  const double decay = report.delta * (1.0 - options.tol);
  report.trials.resize(static_cast<std::size_t>(options.trials));
  parallel_chunks(report.trials.size(), 1, [&](std::size_t k) {
    RngStream rng = RngStream::derive(options.seed, rng_salt::kBoundTrial, k);
    const Eigen::Index n = static_cast<Eigen::Index>(nodes.size());
    Eigen::VectorXd xa0(n), xb0(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      xa0(i) = rng.uniform(-options.ic_scale, options.ic_scale);
      xb0(i) = rng.uniform(-options.ic_scale, options.ic_scale);
    }
    TrajectoryPair pair = simulate(nodes, coupling, xa0, xb0, report.horizon, report.dt, norm);
    BoundTrial trial;
    const double d0 = pair.distance.empty() ? 0.0 : pair.distance.front();
    for (std::size_t i = 0; i < pair.distance.size(); ++i) {
      double envelope = d0 * std::exp(-decay * pair.times[i]);
      if (envelope < 1e-290) continue;  // both sides at numerical zero
      trial.worst_margin = std::min(trial.worst_margin, 1.0 - pair.distance[i] / envelope);
    }
    RateFit fit = fit_rate(pair);
    trial.fitted_rate = fit.rate;
    trial.pass = !pair.diverged && trial.worst_margin >= -1e-9;
    report.trials[k] = trial;
  });

  for (const auto& t : report.trials) {
    report.worst_margin = std::min(report.worst_margin, t.worst_margin);
    report.all_pass = report.all_pass && t.pass;
  }
  report.verdict = report.all_pass ? "contracting (bound verified)" : "contracting (bound violated)";
  return report;
}

}  // namespace motifcloss
