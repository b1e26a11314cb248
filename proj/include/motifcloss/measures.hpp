#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace motifcloss {

namespace detail {

inline void require_square_finite(const Eigen::MatrixXd& a, const char* who) {
  if (a.rows() == 0 || a.rows() != a.cols())
    throw std::invalid_argument(std::string(who) + ": matrix must be square and non-empty");
  if (!a.allFinite())
    throw std::invalid_argument(std::string(who) + ": matrix has non-finite entries");
}

// Topological order of the off-diagonal sparsity pattern, if acyclic.
// Triangularizable matrices get exact eigenvalues (their diagonal), which is
// what makes "acyclic pattern => zero spectral abscissa" hold to the last bit
// instead of the eigensolver's O(eps^{1/n}) noise on nilpotent blocks.
inline bool pattern_topo_order(const Eigen::MatrixXd& a, std::vector<int>* order) {
  const int n = static_cast<int>(a.rows());
  std::vector<std::vector<int>> succ(static_cast<std::size_t>(n));
  std::vector<int> indeg(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && a(i, j) != 0.0) {
        succ[static_cast<std::size_t>(j)].push_back(i);  // entry (i,j): j feeds i
        ++indeg[static_cast<std::size_t>(i)];
      }
  std::vector<int> ready;
  for (int i = 0; i < n; ++i)
    if (indeg[static_cast<std::size_t>(i)] == 0) ready.push_back(i);
  std::vector<int> topo;
  topo.reserve(static_cast<std::size_t>(n));
  while (!ready.empty()) {
    int u = ready.back();
    ready.pop_back();
    topo.push_back(u);
    for (int v : succ[static_cast<std::size_t>(u)])
      if (--indeg[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
  }
  if (static_cast<int>(topo.size()) != n) return false;
  if (order) *order = std::move(topo);
  return true;
}

}  // namespace detail

// Maximum real part of the eigenvalues.  Acyclic off-diagonal patterns skip
// the eigensolver entirely: a permutation makes such matrices triangular, so
// the eigenvalues are exactly the diagonal entries.
inline double spectral_abscissa(const Eigen::MatrixXd& a) {
  detail::require_square_finite(a, "spectral_abscissa");
  if (detail::pattern_topo_order(a, nullptr)) return a.diagonal().maxCoeff();
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spectral_abscissa: eigensolver failed to converge");
  return es.eigenvalues().real().maxCoeff();
}

inline bool is_metzler(const Eigen::MatrixXd& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (i != j && a(i, j) < 0.0) return false;
  return true;
}

// Strong connectivity of the off-diagonal nonzero pattern.
inline bool pattern_irreducible(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  if (n == 1) return true;
  auto reach_all = [&](bool transpose) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        if (v == u || seen[static_cast<std::size_t>(v)]) continue;
        double entry = transpose ? a(u, v) : a(v, u);  // u -> v influence
        if (entry != 0.0) {
          seen[static_cast<std::size_t>(v)] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == n;
  };
  return reach_all(false) && reach_all(true);
}

// Symmetric positive-definite metric P with cached square root factors.
class Metric {
 public:
  explicit Metric(const Eigen::MatrixXd& p, double epsilon = 0.0) : epsilon_(epsilon) {
    detail::require_square_finite(p, "Metric");
    p_ = 0.5 * (p + p.transpose());  // symmetrized exactly
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p_);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("Metric: symmetric eigensolve failed");
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("Metric: matrix is not positive definite");
    sqrt_ = es.operatorSqrt();
    inv_sqrt_ = es.operatorInverseSqrt();
  }

  static Metric identity(int n) { return Metric(Eigen::MatrixXd::Identity(n, n)); }

  const Eigen::MatrixXd& p() const { return p_; }
  const Eigen::MatrixXd& sqrt() const { return sqrt_; }
  const Eigen::MatrixXd& inverse_sqrt() const { return inv_sqrt_; }
  double epsilon() const { return epsilon_; }
  int dim() const { return static_cast<int>(p_.rows()); }

  // Weighted vector norm |x|_P = |P^{1/2} x|.
  double norm(const Eigen::VectorXd& x) const { return (sqrt_ * x).norm(); }

 private:
  Eigen::MatrixXd p_, sqrt_, inv_sqrt_;
  double epsilon_;
};

enum class MeasureTag { one, two, infinity_, spectral, weighted_two };

// A matrix measure selector: one of the classical induced-norm measures, the
// spectral abscissa, or a metric-weighted two-norm measure.
class MeasureKind {
 public:
  static MeasureKind one() { return MeasureKind(MeasureTag::one); }
  static MeasureKind two() { return MeasureKind(MeasureTag::two); }
  static MeasureKind infinity() { return MeasureKind(MeasureTag::infinity_); }
  static MeasureKind spectral() { return MeasureKind(MeasureTag::spectral); }
  static MeasureKind weighted_two(Metric metric) {
    MeasureKind k(MeasureTag::weighted_two);
    k.metric_ = std::move(metric);
    return k;
  }

  MeasureTag tag() const { return tag_; }
  const Metric& metric() const {
    if (!metric_) throw std::logic_error("MeasureKind: no metric attached");
    return *metric_;
  }

  std::string name() const {
    switch (tag_) {
      case MeasureTag::one: return "one";
      case MeasureTag::two: return "two";
      case MeasureTag::infinity_: return "infinity";
      case MeasureTag::spectral: return "spectral";
      case MeasureTag::weighted_two: return "weighted_two";
    }
    return "?";
  }

 private:
  explicit MeasureKind(MeasureTag tag) : tag_(tag) {}
  MeasureTag tag_;
  std::optional<Metric> metric_;
};

inline MeasureKind measure_from_name(const std::string& name) {
  if (name == "one") return MeasureKind::one();
  if (name == "two") return MeasureKind::two();
  if (name == "infinity") return MeasureKind::infinity();
  if (name == "spectral") return MeasureKind::spectral();
  throw std::invalid_argument("unknown measure `" + name + "`");
}

// Matrix measure (logarithmic norm) of A for the selected kind.
inline double mu(const MeasureKind& kind, const Eigen::MatrixXd& a) {
  detail::require_square_finite(a, "mu");
  const Eigen::Index n = a.rows();
  switch (kind.tag()) {
    case MeasureTag::one: {
      double best = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j) {
        double s = a(j, j);
        for (Eigen::Index i = 0; i < n; ++i)
          if (i != j) s += std::abs(a(i, j));
        best = std::max(best, s);
      }
      return best;
    }
    case MeasureTag::infinity_: {
      double best = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < n; ++i) {
        double s = a(i, i);
        for (Eigen::Index j = 0; j < n; ++j)
          if (j != i) s += std::abs(a(i, j));
        best = std::max(best, s);
      }
      return best;
    }
    case MeasureTag::two: {
      Eigen::MatrixXd s = 0.5 * (a + a.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success)
        throw std::runtime_error("mu(two): symmetric eigensolve failed");
      return es.eigenvalues().maxCoeff();
    }
    case MeasureTag::spectral:
      return spectral_abscissa(a);
    case MeasureTag::weighted_two: {
      const Metric& m = kind.metric();
      if (m.dim() != n) throw std::invalid_argument("mu: metric dimension mismatch");
      Eigen::MatrixXd l = m.sqrt() * a * m.inverse_sqrt();
      Eigen::MatrixXd s = 0.5 * (l + l.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success)
        throw std::runtime_error("mu(weighted_two): symmetric eigensolve failed");
      return es.eigenvalues().maxCoeff();
    }
  }
  throw std::logic_error("mu: unreachable");
}

// Solves A'X + XA = -Q for real A, Q via the complex Schur form of A
// (Bartels-Stewart, column substitution).  Requires lambda_i + lambda_j != 0
// over the eigenvalues of A, i.e. A Hurwitz in the intended use.
inline Eigen::MatrixXd solve_continuous_lyapunov(const Eigen::MatrixXd& a,
                                                 const Eigen::MatrixXd& q) {
  detail::require_square_finite(a, "solve_continuous_lyapunov");
  if (q.rows() != a.rows() || q.cols() != a.cols())
    throw std::invalid_argument("solve_continuous_lyapunov: dimension mismatch");
  const Eigen::Index n = a.rows();

  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(a.cast<std::complex<double>>());
  if (schur.info() != Eigen::Success)
    throw std::runtime_error("solve_continuous_lyapunov: Schur decomposition failed");
  const Eigen::MatrixXcd& t = schur.matrixT();
  const Eigen::MatrixXcd& u = schur.matrixU();

  // A real, so A' = A^H and the transformed equation is T^H Y + Y T = -F.
  Eigen::MatrixXcd f = u.adjoint() * q.cast<std::complex<double>>() * u;
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd th = t.adjoint();
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXcd rhs = -f.col(k);
    for (Eigen::Index j = 0; j < k; ++j) rhs -= t(j, k) * y.col(j);
    Eigen::MatrixXcd lhs = th;
    lhs.diagonal().array() += t(k, k);
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(lhs(i, i)) < 1e-300)
        throw std::runtime_error(
            "solve_continuous_lyapunov: singular (eigenvalue pair sums to zero)");
    y.col(k) = lhs.triangularView<Eigen::Lower>().solve(rhs);
  }
  Eigen::MatrixXd x = (u * y * u.adjoint()).real();
  x = 0.5 * (x + x.transpose());

  double residual = (a.transpose() * x + x * a + q).cwiseAbs().maxCoeff();
  double scale = std::max(1.0, q.cwiseAbs().maxCoeff() + x.cwiseAbs().maxCoeff());
  if (!(residual <= 1e-8 * scale))
    throw std::runtime_error("solve_continuous_lyapunov: residual too large");
  return x;
}

namespace detail {

// Perron vector of an irreducible non-negative matrix, or nullopt when the
// numerics look degenerate (near-zero entries).
inline std::optional<Eigen::VectorXd> perron_vector(const Eigen::MatrixXd& b) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(b);
  if (es.info() != Eigen::Success) return std::nullopt;
  Eigen::Index which = 0;
  es.eigenvalues().real().maxCoeff(&which);
  // For irreducible non-negative B the dominant eigenvector has constant
  // phase, so its entrywise modulus is the positive Perron vector.
  Eigen::VectorXd v = es.eigenvectors().col(which).cwiseAbs();
  double top = v.maxCoeff();
  if (!(top > 0.0) || v.minCoeff() < 1e-12 * top) return std::nullopt;
  return v;
}

}  // namespace detail

// A metric P with mu(weighted_two(P), A) <= mu(spectral, A) + epsilon.
//
// Irreducible Metzler matrices admit an exactly optimal *diagonal* metric
// built from the left/right Perron vectors of A + cI; everything else goes
// through the Lyapunov equation A~'P + PA~ = -I with A~ shifted to be
// Hurwitz by epsilon.  Numerical failure raises; there is no silent fallback
// past the Lyapunov route.
inline Metric metric_for(const Eigen::MatrixXd& a, double epsilon = 1e-6) {
  detail::require_square_finite(a, "metric_for");
  if (!(epsilon > 0.0)) throw std::invalid_argument("metric_for: epsilon must be > 0");
  const Eigen::Index n = a.rows();
  if (n == 1) return Metric(Eigen::MatrixXd::Identity(1, 1), epsilon);

  const double mu_a = spectral_abscissa(a);

  if (is_metzler(a) && pattern_irreducible(a)) {
    double c = 1.0 + std::max(0.0, -a.diagonal().minCoeff());
    Eigen::MatrixXd b = a + c * Eigen::MatrixXd::Identity(n, n);
    auto right = detail::perron_vector(b);
    auto left = detail::perron_vector(b.transpose());
    if (right && left) {
      Eigen::VectorXd d = left->cwiseQuotient(*right);
      d /= d.maxCoeff();
      Metric metric(d.asDiagonal().toDenseMatrix(), epsilon);
      double achieved = mu(MeasureKind::weighted_two(metric), a);
      double slack = 1e-9 * std::max(1.0, std::abs(mu_a));
      if (achieved <= mu_a + epsilon + slack) return metric;
      // Degenerate Perron numerics; fall through to the Lyapunov route.
    }
  }

  Eigen::MatrixXd shifted = a - (mu_a + epsilon) * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd p;
  try {
    p = solve_continuous_lyapunov(shifted, Eigen::MatrixXd::Identity(n, n));
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(std::string("metric_for: ") + e.what());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (es.info() != Eigen::Success || !(lo > 0.0))
    throw std::runtime_error("metric_for: Lyapunov solution is not positive definite");
  p /= hi;  // scale-free; keeps the metric factors well-ranged
  return Metric(p, epsilon);
}

// Largest singular value of P_out^{1/2} M P_in^{-1/2}: the induced norm of M
// as a map between the two weighted spaces.
inline double induced_norm(const Eigen::MatrixXd& m, const Metric& row_metric,
                           const Metric& col_metric) {
  if (m.rows() != row_metric.dim() || m.cols() != col_metric.dim())
    throw std::invalid_argument("induced_norm: dimension mismatch");
  if (!m.allFinite()) throw std::invalid_argument("induced_norm: non-finite entries");
  Eigen::MatrixXd l = row_metric.sqrt() * m * col_metric.inverse_sqrt();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(l);
  return svd.singularValues()(0);
}

}  // namespace motifcloss
