#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddp/kappa.hpp"
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

struct Sampled {
  NetworkTopology topo;
  WeightVector w;
  Eigen::MatrixXd inputs;
};

Sampled sample(Rng& rng, const std::vector<int>& shape, int n) {
  Sampled s{NetworkTopology::layered(shape), {}, {}};
  do {
    s.w = init_weights(s.topo, rng);
    s.inputs = normals(rng, n, shape.front());
  } while (oracles::kink_clearance(s.topo, s.w, s.inputs) < 1e-3);
  return s;
}

}  // namespace

TEST_CASE("alpha=0 chain kappa is (b^2, a^2)") {
  NetworkTopology t = chain();
  const double a = 1.4, b = -0.6;
  WeightVector w(2);
  w << a, b;
  ComplexityConfig c;
  c.kappa_floor = 1e-300;
  Eigen::MatrixXd x(1, 1);
  x << 1.0;
  WeightVector k = kappa(t, w, x, c);
  CHECK(k[0] == doctest::Approx(b * b));
  CHECK(k[1] == doctest::Approx(a * a));
}

TEST_CASE("alpha=0 kappa equals the brute-force path oracle") {
  Rng rng(21);
  ComplexityConfig c;
  c.kappa_floor = 1e-300;
  for (int trial = 0; trial < 5; ++trial) {
    Sampled s = sample(rng, {2, 2, 2, 1}, 4);
    WeightVector k = kappa(s.topo, s.w, s.inputs, c);
    for (int e = 0; e < k.size(); ++e) {
      double ref = oracles::brute_force_path_kappa(s.topo, s.w, e);
      CHECK(std::abs(k[e] - ref) <= 1e-10 * std::max(1e-300, std::abs(ref)));
    }
  }
}

TEST_CASE("alpha=1 second-moment kappa equals the diagonal Gaussian Fisher") {
  Rng rng(22);
  ComplexityConfig c;
  c.alpha = 1.0;
  c.s_mode = SMode::SecondMoment;
  c.kappa_floor = 1e-300;
  for (int trial = 0; trial < 5; ++trial) {
    Sampled s = sample(rng, {2, 3, 2}, 64);
    WeightVector k = kappa(s.topo, s.w, s.inputs, c);
    WeightVector fisher = oracles::diagonal_fisher_gaussian(s.topo, s.w, s.inputs);
    for (int e = 0; e < k.size(); ++e) {
      double ref = std::max(fisher[e], c.kappa_floor);
      CHECK(std::abs(k[e] - ref) <= 1e-8 * ref);
    }
  }
}

TEST_CASE("kappa matches half the second finite difference of gamma_net") {
  Rng rng(23);
  for (double alpha : {0.0, 0.5, 1.0})
    for (SMode mode : {SMode::Variance, SMode::SecondMoment}) {
      ComplexityConfig c;
      c.alpha = alpha;
      c.s_mode = mode;
      Sampled s = sample(rng, {2, 3, 1}, 16);
      WeightVector k = kappa(s.topo, s.w, s.inputs, c);
      WeightVector fd = oracles::half_second_difference(
          [&](const WeightVector& w) {
            return gamma_net(gamma_forward(s.topo, w, s.inputs, c), s.topo);
          },
          s.w);
      for (int e = 0; e < k.size(); ++e)
        if (k[e] > 10.0 * c.kappa_floor)
          CHECK(std::abs(k[e] - fd[e]) / k[e] < 1e-4);
    }
}

TEST_CASE("ddp_sgd_step basics") {
  WeightVector w(2), zero = WeightVector::Zero(2), ones = WeightVector::Ones(2);
  w << 1.0, -2.0;
  CHECK(((ddp_sgd_step(w, zero, ones, 0.1) - w).norm()) == 0.0);
  WeightVector g(2);
  g << 0.5, 0.5;
  WeightVector plain = ddp_sgd_step(w, g, ones, 0.1);
  CHECK(plain[0] == doctest::Approx(w[0] - 0.1 * 0.5));
  CHECK(plain[1] == doctest::Approx(w[1] - 0.1 * 0.5));
  // chain with alpha=0: step on (x->h) scales the gradient by 1/b^2
  WeightVector k(2);
  const double a = 1.4, b = -0.6;
  k << b * b, a * a;
  WeightVector stepped = ddp_sgd_step(w, g, k, 0.1);
  CHECK(stepped[0] == doctest::Approx(w[0] - 0.1 * 0.5 / (b * b)));
  CHECK_THROWS_AS(ddp_sgd_step(w, g, k, -1.0), Error);
}

TEST_CASE("kappa is floored at epsilon") {
  NetworkTopology t = chain();
  WeightVector w(2);
  w << 1.0, 0.0;  // zero outgoing weight kills kappa on the first edge
  ComplexityConfig c;
  Eigen::MatrixXd x(1, 1);
  x << 1.0;
  WeightVector k = kappa(t, w, x, c);
  CHECK(k.minCoeff() >= c.kappa_floor);
}

TEST_CASE("one DDP-SGD step commutes with node rescaling") {
  Rng rng(25);
  for (double alpha : {0.0, 0.5, 1.0}) {
    ComplexityConfig c;
    c.alpha = alpha;
    c.kappa_floor = 1e-300;
    Sampled s = sample(rng, {2, 2, 1}, 32);
    Batch batch;
    batch.inputs = s.inputs;
    batch.targets = network_outputs(s.topo, s.w, s.inputs);
    for (int i = 0; i < batch.targets.rows(); ++i) batch.targets(i, 0) += rng.normal();
    Eigen::MatrixXd probes = normals(rng, 64, 2);
    double scale = std::max(1.0, network_outputs(s.topo, s.w, probes).cwiseAbs().maxCoeff());
    int v = s.topo.internal_nodes()[0];
    CHECK(verify_rescaling_invariance(s.topo, s.w, batch, LossKind::Squared, c, 0.05, v, 1.0,
                                      probes) == 0.0);
    for (double rho : {0.5, 3.0}) {
      double d = verify_rescaling_invariance(s.topo, s.w, batch, LossKind::Squared, c, 0.05, v,
                                             rho, probes);
      CHECK(d <= 1e-8 * scale);
    }
  }
}

TEST_CASE("gamma_net_adjoint is one at outputs and sums squared weights backwards") {
  NetworkTopology t = NetworkTopology::layered({2, 2, 1});
  WeightVector w = WeightVector::Ones(t.edge_count()) * 0.5;
  ComplexityConfig c;
  Eigen::VectorXd dg = gamma_net_adjoint(t, w, c);
  for (int v : t.output_nodes()) CHECK(dg[v] == 1.0);
  for (int v : t.internal_nodes()) CHECK(dg[v] == doctest::Approx(0.25));
  for (int v : t.input_nodes()) CHECK(dg[v] == doctest::Approx(2 * 0.25 * 0.25));
}
