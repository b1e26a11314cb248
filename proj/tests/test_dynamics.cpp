#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>

#include "motifcloss/census.hpp"
#include "motifcloss/dynamics.hpp"
#include "motifcloss/measures.hpp"
#include "motifcloss/rng.hpp"

using namespace motifcloss;

namespace {

std::vector<TestNode> uniform_nodes(int n, double decay, double gain) {
  return std::vector<TestNode>(static_cast<std::size_t>(n), TestNode{decay, gain});
}

}  // namespace

TEST_CASE("single linear node matches the exact exponential") {
  auto nodes = uniform_nodes(1, 1.0, 0.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(1, 1);
  Eigen::VectorXd xa(1), xb(1);
  xa << 1.0;
  xb << 0.0;
  auto pair = simulate(nodes, a, xa, xb, 1.0, 1e-3);
  REQUIRE(pair.times.size() == 1001);
  REQUIRE_THAT(pair.times.back(), Catch::Matchers::WithinAbs(1.0, 1e-12));
  REQUIRE_FALSE(pair.diverged);
  REQUIRE_THAT(pair.distance.front(), Catch::Matchers::WithinAbs(1.0, 0.0));
  REQUIRE_THAT(pair.distance.back(), Catch::Matchers::WithinAbs(std::exp(-1.0), 1e-9));
}

TEST_CASE("scalar nonlinear contraction decays monotonically at the node rate") {
  std::vector<TestNode> nodes{TestNode{1.0, 0.5}};
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(1, 1);
  Eigen::VectorXd xa(1), xb(1);
  xa << 2.0;
  xb << -1.0;
  auto pair = simulate(nodes, a, xa, xb, 8.0, 0.01);
  for (std::size_t i = 1; i < pair.distance.size(); ++i)
    REQUIRE(pair.distance[i] <= pair.distance[i - 1] + 1e-15);
  auto fit = fit_rate(pair);
  REQUIRE_FALSE(fit.hit_zero);
  REQUIRE(fit.rate >= 0.5 - 1e-6);
}

TEST_CASE("antisymmetric rotation leaves the Euclidean distance purely exponential") {
  auto nodes = uniform_nodes(2, 1.0, 0.0);
  Eigen::MatrixXd a(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  Eigen::VectorXd xa(2), xb(2);
  xa << 1.0, -0.5;
  xb << -0.25, 0.75;
  auto pair = simulate(nodes, a, xa, xb, 2.0, 1e-3);
  const double d0 = (xa - xb).norm();
  for (std::size_t i = 0; i < pair.times.size(); i += 250)
    REQUIRE_THAT(pair.distance[i],
                 Catch::Matchers::WithinAbs(d0 * std::exp(-pair.times[i]), 1e-9));
}

TEST_CASE("linear systems track the matrix exponential") {
  RngStream rng = RngStream::derive(31, 0x77, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 4;
    std::vector<TestNode> nodes;
    Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      nodes.push_back(TestNode{rng.uniform(1.0, 2.0), 0.0});
      jac(i, i) = -nodes.back().decay;
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) {
          coupling(i, j) = rng.uniform(-0.5, 0.5);
          jac(i, j) = coupling(i, j);
        }
    Eigen::VectorXd xa(n), xb(n);
    for (int i = 0; i < n; ++i) {
      xa(i) = rng.uniform(-2.0, 2.0);
      xb(i) = rng.uniform(-2.0, 2.0);
    }
    auto pair = simulate(nodes, coupling, xa, xb, 1.0, 1e-3);
    Eigen::VectorXd exact = (jac * 1.0).exp() * (xa - xb);
    Eigen::VectorXd simulated = pair.xa.back() - pair.xb.back();
    REQUIRE((simulated - exact).norm() <= 1e-9 * std::max(1.0, exact.norm()));
  }
}

TEST_CASE("halving the step shrinks the terminal error about sixteen-fold") {
  RngStream rng = RngStream::derive(57, 0x78, 0);
  const int n = 3;
  std::vector<TestNode> nodes;
  Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    nodes.push_back(TestNode{rng.uniform(1.0, 2.0), 0.0});
    jac(i, i) = -nodes.back().decay;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) {
        coupling(i, j) = rng.uniform(-0.8, 0.8);
        jac(i, j) = coupling(i, j);
      }
  Eigen::VectorXd xa(n), xb(n);
  xa << 1.5, -0.5, 0.75;
  xb << -1.0, 0.25, 0.5;
  const double exact = ((jac * 1.0).exp() * (xa - xb)).norm();
  auto terminal = [&](double dt) {
    return simulate(nodes, coupling, xa, xb, 1.0, dt).distance.back();
  };
  const double coarse = std::abs(terminal(0.02) - exact);
  const double fine = std::abs(terminal(0.01) - exact);
  REQUIRE(fine > 1e-13);  // stay above the roundoff floor so the ratio means something
  const double ratio = coarse / fine;
  REQUIRE(ratio >= 16.0 * 0.7);
  REQUIRE(ratio <= 16.0 * 1.3);
}

TEST_CASE("simulate validates its inputs") {
  auto nodes = uniform_nodes(2, 1.0, 0.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2);
  REQUIRE_THROWS_AS(simulate(nodes, a, x0, x0, 1.0, 0.2), std::invalid_argument);  // guard
  REQUIRE_THROWS_AS(simulate(nodes, a, x0, x0, 1.0, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(simulate(nodes, Eigen::MatrixXd::Zero(3, 3), x0, x0, 1.0, 0.01),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(simulate({TestNode{1.0, 1.0}}, Eigen::MatrixXd::Zero(1, 1),
                             Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 1.0, 0.01),
                    std::invalid_argument);  // |gain| < decay violated
}

TEST_CASE("fit_rate recovers an exact exponential slope") {
  TrajectoryPair pair;
  pair.dt = 0.01;
  for (int i = 0; i <= 100; ++i) {
    double t = 0.01 * i;
    pair.times.push_back(t);
    pair.distance.push_back(3.0 * std::exp(-2.0 * t));
  }
  auto fit = fit_rate(pair);
  REQUIRE_THAT(fit.rate, Catch::Matchers::WithinAbs(2.0, 1e-9));
  REQUIRE(fit.points == 51);
  auto full = fit_rate(pair, 1.0);
  REQUIRE_THAT(full.rate, Catch::Matchers::WithinAbs(2.0, 1e-9));
  REQUIRE(full.points == 101);
}

TEST_CASE("fit_rate on constant distance reports zero") {
  TrajectoryPair pair;
  pair.dt = 0.1;
  for (int i = 0; i <= 20; ++i) {
    pair.times.push_back(0.1 * i);
    pair.distance.push_back(0.75);
  }
  REQUIRE_THAT(fit_rate(pair).rate, Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("fit_rate flags a distance that reaches zero") {
  TrajectoryPair pair;
  pair.dt = 0.1;
  for (int i = 0; i <= 20; ++i) {
    pair.times.push_back(0.1 * i);
    pair.distance.push_back(i < 18 ? 1.0 : 0.0);
  }
  auto fit = fit_rate(pair);
  REQUIRE(fit.hit_zero);
  REQUIRE(std::isinf(fit.rate));
}

TEST_CASE("fit_rate refuses windows with fewer than ten points") {
  TrajectoryPair pair;
  pair.dt = 0.1;
  for (int i = 0; i <= 12; ++i) {
    pair.times.push_back(0.1 * i);
    pair.distance.push_back(std::exp(-0.1 * i));
  }
  REQUIRE_THROWS_AS(fit_rate(pair, 0.5), std::invalid_argument);
  REQUIRE_NOTHROW(fit_rate(pair, 1.0));
}

TEST_CASE("decoupled nodes pass the envelope at the slowest node rate") {
  std::vector<TestNode> nodes{TestNode{1.5, 0.3}, TestNode{2.0, 0.0}, TestNode{1.0, 0.4}};
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  BoundOptions opt;
  opt.seed = 5;
  auto report = check_bound(nodes, a, MeasureKind::spectral(), opt);
  REQUIRE(report.guarantee);
  REQUIRE_THAT(report.delta, Catch::Matchers::WithinAbs(0.6, 1e-12));
  REQUIRE(report.all_pass);
  REQUIRE(report.verdict == "contracting (bound verified)");
  REQUIRE(report.worst_margin >= 0.0);
  for (const auto& t : report.trials) REQUIRE(t.fitted_rate >= 0.6 - 1e-6);
}

TEST_CASE("cascade with uniform linear nodes satisfies the matched-metric envelope") {
  // Three-node cascade coupling is acyclic, so the coupling contributes zero
  // to the predicted rate and the guarantee equals the shared node rate.
  Digraph g;
  g.add_edge("a", "b");
  g.add_edge("a", "c");
  g.add_edge("b", "c");
  Eigen::MatrixXd coupling = pattern_matrix(pattern_of(g), 3);
  auto nodes = uniform_nodes(3, 0.5, 0.0);
  BoundOptions opt;
  opt.seed = 9;
  auto report = check_bound(nodes, coupling, MeasureKind::spectral(), opt);
  REQUIRE(report.guarantee);
  REQUIRE_THAT(report.delta, Catch::Matchers::WithinAbs(0.5, 1e-12));
  REQUIRE(report.all_pass);
}

TEST_CASE("nonlinear cascade contracts at least at the predicted rate") {
  // The cascade Jacobian is defective (triple eigenvalue with a nilpotent
  // part), so the Euclidean distance carries a polynomial-in-t factor and a
  // naive fit underestimates the rate.  The predicted rate is exact in the
  // norm matched to the coupling -- the same metric check_bound uses.
  Digraph g;
  g.add_edge("a", "b");
  g.add_edge("a", "c");
  g.add_edge("b", "c");
  Eigen::MatrixXd coupling = pattern_matrix(pattern_of(g), 3);
  auto nodes = uniform_nodes(3, 0.5, 0.2);  // per-node rate 0.3, acyclic coupling
  DistanceNorm norm = DistanceNorm::in_metric(metric_for(coupling, 1e-6));
  RngStream rng = RngStream::derive(21, 0x79, 0);
  for (int trial = 0; trial < 4; ++trial) {
    Eigen::VectorXd xa(3), xb(3);
    for (int i = 0; i < 3; ++i) {
      xa(i) = rng.uniform(-2.0, 2.0);
      xb(i) = rng.uniform(-2.0, 2.0);
    }
    auto pair = simulate(nodes, coupling, xa, xb, 20.0, 0.01, norm);
    auto fit = fit_rate(pair);
    REQUIRE_FALSE(fit.hit_zero);
    REQUIRE(fit.rate >= 0.3 * (1.0 - 0.05));
  }
}

TEST_CASE("irreducible nonnegative ring with mixed nodes passes in the Perron metric") {
  std::vector<TestNode> nodes{TestNode{2.0, 0.3}, TestNode{1.8, 0.2}, TestNode{2.2, 0.25}};
  Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(3, 3);
  coupling(1, 0) = coupling(2, 1) = coupling(0, 2) = 0.4;
  BoundOptions opt;
  opt.seed = 13;
  auto report = check_bound(nodes, coupling, MeasureKind::spectral(), opt);
  REQUIRE(report.guarantee);
  REQUIRE_THAT(report.delta, Catch::Matchers::WithinAbs(1.6 - 0.4, 1e-9));
  REQUIRE(report.all_pass);
  REQUIRE(report.worst_margin >= 0.0);
}

TEST_CASE("column and row measures certify symmetric weak coupling in their own norms") {
  auto nodes = uniform_nodes(2, 1.0, 0.0);
  Eigen::MatrixXd coupling(2, 2);
  coupling << 0.0, 0.5, 0.5, 0.0;
  for (auto kind : {MeasureKind::one(), MeasureKind::infinity(), MeasureKind::two()}) {
    BoundOptions opt;
    opt.seed = 17;
    auto report = check_bound(nodes, coupling, kind, opt);
    INFO(kind.name());
    REQUIRE(report.guarantee);
    REQUIRE_THAT(report.delta, Catch::Matchers::WithinAbs(0.5, 1e-9));
    REQUIRE(report.all_pass);
  }
}

TEST_CASE("nonlinear cascade system passes the envelope check") {
  Digraph g;
  g.add_edge("a", "b");
  g.add_edge("a", "c");
  g.add_edge("b", "c");
  Eigen::MatrixXd coupling = pattern_matrix(pattern_of(g), 3);
  auto nodes = uniform_nodes(3, 0.5, 0.2);
  BoundOptions opt;
  opt.seed = 29;
  auto report = check_bound(nodes, coupling, MeasureKind::spectral(), opt);
  REQUIRE(report.guarantee);
  REQUIRE_THAT(report.delta, Catch::Matchers::WithinAbs(0.3, 1e-9));
  REQUIRE(report.all_pass);
}

TEST_CASE("fitted rate of the scalar linear node is one") {
  auto nodes = uniform_nodes(1, 1.0, 0.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(1, 1);
  Eigen::VectorXd xa(1), xb(1);
  xa << 1.0;
  xb << 0.0;
  auto fit = fit_rate(simulate(nodes, a, xa, xb, 1.0, 1e-3));
  REQUIRE_THAT(fit.rate, Catch::Matchers::WithinAbs(1.0, 1e-3));
}

TEST_CASE("strong coupling yields no guarantee, honestly") {
  // A three-node cycle with weights above the node rate: the sufficient
  // bound fails even though the system may still be stable.
  auto nodes = uniform_nodes(3, 1.0, 0.5);
  Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(3, 3);
  coupling(1, 0) = coupling(2, 1) = coupling(0, 2) = 2.0;
  auto report = check_bound(nodes, coupling);
  REQUIRE_FALSE(report.guarantee);
  REQUIRE(report.verdict == "no guarantee");
  REQUIRE(report.trials.empty());
  REQUIRE(report.delta < 0.0);
  REQUIRE_THAT(report.delta, Catch::Matchers::WithinAbs(0.5 - 2.0, 1e-9));
}

TEST_CASE("check_bound reports are deterministic") {
  std::vector<TestNode> nodes{TestNode{2.0, 0.3}, TestNode{1.8, 0.2}, TestNode{2.2, 0.25}};
  Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(3, 3);
  coupling(1, 0) = coupling(2, 1) = coupling(0, 2) = 0.4;
  BoundOptions opt;
  opt.seed = 23;
  auto a = check_bound(nodes, coupling, MeasureKind::spectral(), opt);
  auto b = check_bound(nodes, coupling, MeasureKind::spectral(), opt);
  REQUIRE(a.worst_margin == b.worst_margin);
  REQUIRE(a.trials.size() == b.trials.size());
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    REQUIRE(a.trials[i].worst_margin == b.trials[i].worst_margin);
    REQUIRE(a.trials[i].fitted_rate == b.trials[i].fitted_rate);
  }
}
