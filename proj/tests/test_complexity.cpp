#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddp/complexity.hpp"
#include "ddp/oracles.hpp"
#include "ddp/rng.hpp"

using namespace ddp;

namespace {

NetworkTopology chain() {
  return NetworkTopology::build({{"x", NodeKind::Input},
                                 {"h", NodeKind::Internal},
                                 {"y", NodeKind::Output}},
                                {{"x", "h"}, {"h", "y"}});
}

Eigen::MatrixXd normals(Rng& rng, int n, int d) {
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
  return x;
}

}  // namespace

TEST_CASE("alpha=0 chain recursion gives the l2 path norm") {
  NetworkTopology t = chain();
  const double a = 0.7, b = -1.3;
  WeightVector w(2);
  w << a, b;
  ComplexityConfig c;  // alpha = 0
  Eigen::MatrixXd x(1, 1);
  x << 1.0;
  NodeGamma g = gamma_forward(t, w, x, c);
  CHECK(g.gamma_sq[t.node_index("x")] == doctest::Approx(1.0));
  CHECK(g.gamma_sq[t.node_index("h")] == doctest::Approx(a * a));
  CHECK(g.gamma_sq[t.node_index("y")] == doctest::Approx(a * a * b * b));
  CHECK(gamma_net(g, t) == doctest::Approx(a * a * b * b));
}

TEST_CASE("alpha=1 second moment is the mean squared pre-activation") {
  Rng rng(3);
  NetworkTopology t = NetworkTopology::layered({2, 3, 1});
  WeightVector w = init_weights(t, rng);
  Eigen::MatrixXd x = normals(rng, 16, 2);
  ComplexityConfig c;
  c.alpha = 1.0;
  c.s_mode = SMode::SecondMoment;
  ActivationRecord act = forward(t, w, x);
  NodeGamma g = gamma_forward(t, w, act, c);
  for (int v = 0; v < t.node_count(); ++v) {
    if (t.kind(v) == NodeKind::Input) continue;
    CHECK(g.gamma_sq[v] == doctest::Approx(act.z.col(v).squaredNorm() / 16.0).epsilon(1e-12));
  }
}

TEST_CASE("recursion is consistent with the assembled fan-in matrix") {
  Rng rng(4);
  NetworkTopology t = NetworkTopology::layered({2, 3, 1});
  WeightVector w = init_weights(t, rng);
  Eigen::MatrixXd x = normals(rng, 12, 2);
  for (double alpha : {0.0, 0.5, 1.0})
    for (SMode mode : {SMode::Variance, SMode::SecondMoment}) {
      ComplexityConfig c;
      c.alpha = alpha;
      c.s_mode = mode;
      ActivationRecord act = forward(t, w, x);
      NodeGamma g = gamma_forward(t, w, act, c);
      for (int v = 0; v < t.node_count(); ++v) {
        if (t.kind(v) == NodeKind::Input) continue;
        Eigen::MatrixXd R = estimate_R(t, act, g, v, c);
        const std::vector<int>& in = t.in_edges(v);
        Eigen::VectorXd wv(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) wv[i] = w[in[i]];
        double quad = wv.dot(R * wv);
        CHECK(g.gamma_sq[v] == doctest::Approx(quad).epsilon(1e-12));
      }
    }
}

TEST_CASE("estimate_R special cases") {
  Rng rng(5);
  NetworkTopology t = NetworkTopology::layered({2, 2, 1}, true);
  WeightVector w = init_weights(t, rng);
  Eigen::MatrixXd x = normals(rng, 10, 2);
  ActivationRecord act = forward(t, w, x);

  SUBCASE("alpha=0 ignores the data") {
    ComplexityConfig c;
    NodeGamma g = gamma_forward(t, w, act, c);
    int v = t.internal_nodes()[0];
    Eigen::MatrixXd R = estimate_R(t, act, g, v, c);
    const std::vector<int>& in = t.in_edges(v);
    for (std::size_t i = 0; i < in.size(); ++i)
      for (std::size_t j = 0; j < in.size(); ++j) {
        double expect = i == j ? g.gamma_sq[t.edges()[in[i]].src] : 0.0;
        CHECK(R(i, j) == doctest::Approx(expect));
      }
  }

  SUBCASE("alpha=1 second moment on the first hidden layer is (1/n) X^T X plus bias") {
    ComplexityConfig c;
    c.alpha = 1.0;
    c.s_mode = SMode::SecondMoment;
    NodeGamma g = gamma_forward(t, w, act, c);
    int v = t.internal_nodes()[0];
    const std::vector<int>& in = t.in_edges(v);
    Eigen::MatrixXd R = estimate_R(t, act, g, v, c);
    for (std::size_t i = 0; i < in.size(); ++i)
      for (std::size_t j = 0; j < in.size(); ++j) {
        int u = t.edges()[in[i]].src, u2 = t.edges()[in[j]].src;
        double expect = act.h.col(u).dot(act.h.col(u2)) / 10.0;
        CHECK(R(i, j) == doctest::Approx(expect).epsilon(1e-12));
      }
  }

  SUBCASE("alpha=1 variance zeroes the bias row and column") {
    ComplexityConfig c;
    c.alpha = 1.0;
    c.s_mode = SMode::Variance;
    NodeGamma g = gamma_forward(t, w, act, c);
    int v = t.internal_nodes()[0];
    const std::vector<int>& in = t.in_edges(v);
    Eigen::MatrixXd R = estimate_R(t, act, g, v, c);
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (t.kind(t.edges()[in[i]].src) != NodeKind::Bias) continue;
      for (std::size_t j = 0; j < in.size(); ++j) {
        CHECK(R(i, j) == doctest::Approx(0.0));
        CHECK(R(j, i) == doctest::Approx(0.0));
      }
    }
  }
}

TEST_CASE("alpha=0 gamma_net equals the brute-force l2 path regularizer") {
  Rng rng(6);
  NetworkTopology t = NetworkTopology::layered({2, 3, 2});
  WeightVector w = init_weights(t, rng);
  ComplexityConfig c;
  Eigen::MatrixXd x = normals(rng, 1, 2);
  NodeGamma g = gamma_forward(t, w, x, c);
  double ref = oracles::brute_force_path_regularizer(t, w);
  CHECK(gamma_net(g, t) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("all-zero weights give gamma_net = 0") {
  NetworkTopology t = NetworkTopology::layered({2, 2, 1});
  WeightVector w = WeightVector::Zero(t.edge_count());
  ComplexityConfig c;
  Eigen::MatrixXd x(1, 2);
  x << 1.0, 1.0;
  CHECK(gamma_net(gamma_forward(t, w, x, c), t) == 0.0);
}

TEST_CASE("gamma_net is invariant under node rescaling") {
  Rng rng(7);
  NetworkTopology t = NetworkTopology::layered({2, 3, 1});
  WeightVector w = init_weights(t, rng);
  Eigen::MatrixXd x = normals(rng, 16, 2);
  for (double alpha : {0.0, 0.5, 1.0})
    for (SMode mode : {SMode::Variance, SMode::SecondMoment}) {
      ComplexityConfig c;
      c.alpha = alpha;
      c.s_mode = mode;
      double base = gamma_net(gamma_forward(t, w, x, c), t);
      for (double rho : {0.5, 2.0})
        for (int v : t.internal_nodes()) {
          WeightVector r = apply_node_rescaling(t, w, v, rho);
          double got = gamma_net(gamma_forward(t, r, x, c), t);
          CHECK(got == doctest::Approx(base).epsilon(1e-10));
        }
    }
}

TEST_CASE("bias-only-driven node has zero variance-mode gamma") {
  // z at the node is constant over the batch, so Var(z) = 0
  NetworkTopology t = NetworkTopology::build(
      {{"x", NodeKind::Input}, {"b", NodeKind::Bias}, {"v", NodeKind::Internal},
       {"y", NodeKind::Output}},
      {{"b", "v"}, {"v", "y"}, {"x", "y"}});
  WeightVector w(3);
  w << 0.8, 1.0, 1.0;  // canonical order: b->v, x->y, v->y (by topo dst)
  ComplexityConfig c;
  c.alpha = 1.0;
  c.s_mode = SMode::Variance;
  Eigen::MatrixXd x(3, 1);
  x << 1.0, -2.0, 0.5;
  NodeGamma g = gamma_forward(t, w, x, c);
  CHECK(g.gamma_sq[t.node_index("v")] == 0.0);
}

TEST_CASE("empty batch with alpha > 0 is an error") {
  NetworkTopology t = NetworkTopology::layered({2, 2, 1});
  WeightVector w = WeightVector::Ones(t.edge_count());
  ComplexityConfig c;
  c.alpha = 0.5;
  Eigen::MatrixXd empty(0, 2);
  CHECK_THROWS_AS(gamma_forward(t, w, empty, c), Error);
}

TEST_CASE("config validation") {
  ComplexityConfig c;
  c.alpha = 1.5;
  CHECK_THROWS_AS(c.check(), Error);
  c.alpha = 0.5;
  c.kappa_floor = 0.0;
  CHECK_THROWS_AS(c.check(), Error);
}
