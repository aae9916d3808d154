#include "ddp/verify.hpp"

#include <algorithm>
#include <cmath>

#include "ddp/ddpnorm.hpp"
#include "ddp/kappa.hpp"
#include "ddp/oracles.hpp"
#include "ddp/paths.hpp"
#include "ddp/rng.hpp"

namespace ddp {

namespace {

const std::vector<std::vector<int>> kShapes = {
    {2, 2, 1}, {3, 2, 4, 1}, {2, 3, 3, 2}, {4, 4, 1}, {2, 2, 2, 1}};

struct Instance {
  NetworkTopology topo;
  WeightVector w;
  Eigen::MatrixXd inputs;
};

Eigen::MatrixXd random_inputs(Rng& rng, int n, int d) {
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
  return x;
}

// Random net + weights + batch, resampled until every pre-activation clears
// the ReLU kink margin so that finite differences and gate-frozen curvature
// formulas are comparable.
Instance sample_instance(Rng& rng, int n, double kink_margin = 1e-3, bool with_bias = false) {
  const std::vector<int>& shape = kShapes[rng.below(kShapes.size())];
  Instance inst{NetworkTopology::layered(shape, with_bias), {}, {}};
  for (int attempt = 0; attempt < 200; ++attempt) {
    inst.w = init_weights(inst.topo, rng);
    inst.inputs = random_inputs(rng, n, shape.front());
    if (oracles::kink_clearance(inst.topo, inst.w, inst.inputs) > kink_margin) return inst;
  }
  throw Error("could not sample an instance away from ReLU kinks");
}

// Like sample_instance, but also rejects draws where the normalized forward
// pass is degenerate (tilde_gamma collapses, e.g. alpha=1 variance mode on a
// batch-dead node).
Instance sample_normalized_instance(Rng& rng, int n, const ComplexityConfig& config) {
  for (int attempt = 0; attempt < 50; ++attempt) {
    Instance inst = sample_instance(rng, n);
    try {
      normalized_forward(inst.topo, inst.w, inst.inputs, config);
      return inst;
    } catch (const Error&) {
    }
  }
  throw Error("could not sample a non-degenerate normalized instance");
}

Batch regression_batch(Rng& rng, const Instance& inst) {
  Batch b;
  b.inputs = inst.inputs;
  b.targets = network_outputs(inst.topo, inst.w, inst.inputs);
  for (int i = 0; i < b.targets.rows(); ++i)
    for (int j = 0; j < b.targets.cols(); ++j) b.targets(i, j) += rng.normal();
  return b;
}

ComplexityConfig cycled_config(int trial) {
  ComplexityConfig c;
  const double alphas[] = {0.0, 0.5, 1.0};
  c.alpha = alphas[trial % 3];
  c.s_mode = (trial / 3) % 2 ? SMode::Variance : SMode::SecondMoment;
  return c;
}

using TrialFn = TrialResult(Rng&, int trial);

SuiteResult run_trials(const std::string& name, std::uint64_t seed, int trials, TrialFn* fn) {
  SuiteResult s{name, {}, true};
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    TrialResult r = fn(rng, t);
    r.trial = t;
    r.pass = r.max_error <= r.tolerance;
    s.pass = s.pass && r.pass;
    s.trials.push_back(std::move(r));
  }
  return s;
}

TrialResult orthogonality_trial(Rng& rng, int trial) {
  ComplexityConfig config = cycled_config(trial);
  Instance inst = sample_normalized_instance(rng, 16, config);
  Batch batch = regression_batch(rng, inst);
  LossGrad lg = ddpnorm_gradient(inst.topo, inst.w, batch, LossKind::Squared, config);
  double max_err = 0.0;
  const double eta = 0.05;
  WeightVector stepped = sgd_step_tilde(inst.w, lg.grad, eta);
  for (int v : inst.topo.internal_nodes()) {
    double dot = 0.0, wn2 = 0.0, gn2 = 0.0, sn2 = 0.0;
    for (int e : inst.topo.in_edges(v)) {
      dot += inst.w[e] * lg.grad[e];
      wn2 += inst.w[e] * inst.w[e];
      gn2 += lg.grad[e] * lg.grad[e];
      sn2 += stepped[e] * stepped[e];
    }
    double denom = std::sqrt(wn2) * lg.grad.norm();
    if (denom > 0.0) max_err = std::max(max_err, std::abs(dot) / denom);
    // Pythagoras: orthogonal step => ||w' ||^2 = ||w||^2 + eta^2 ||g||^2
    double expect = wn2 + eta * eta * gn2;
    max_err = std::max(max_err, std::abs(sn2 - expect) / expect * 1e2);  // 1e-10 scaled to 1e-8 gate
  }
  return {0, max_err, 1e-8, false, "max |<w,g>|/(|w||g|), Pythagoras at 1e-10"};
}

TrialResult natgrad_trial(Rng& rng, int) {
  Instance inst = sample_instance(rng, 64);
  ComplexityConfig config;
  config.alpha = 1.0;
  config.s_mode = SMode::SecondMoment;
  config.kappa_floor = 1e-300;  // keep the floor out of the comparison
  WeightVector k = kappa(inst.topo, inst.w, inst.inputs, config);
  WeightVector fisher = oracles::diagonal_fisher_gaussian(inst.topo, inst.w, inst.inputs);
  double max_err = 0.0;
  for (int e = 0; e < k.size(); ++e) {
    double ref = std::max(fisher[e], config.kappa_floor);  // kappa is floored by contract
    max_err = std::max(max_err, std::abs(k[e] - ref) / ref);
  }
  return {0, max_err, 1e-8, false, "kappa(alpha=1) vs diagonal Gaussian Fisher"};
}

TrialResult pathsgd_trial(Rng& rng, int) {
  Instance inst = sample_instance(rng, 4);
  ComplexityConfig config;  // alpha = 0
  config.kappa_floor = 1e-300;
  WeightVector k = kappa(inst.topo, inst.w, inst.inputs, config);
  double max_err = 0.0;
  for (int e = 0; e < k.size(); ++e) {
    double ref = oracles::brute_force_path_kappa(inst.topo, inst.w, e, 10000);
    max_err = std::max(max_err, std::abs(k[e] - ref) / std::max(1e-300, std::abs(ref)));
  }
  return {0, max_err, 1e-10, false, "kappa(alpha=0) vs path enumeration"};
}

TrialResult rescaling_trial(Rng& rng, int trial) {
  Instance inst = sample_instance(rng, 32);
  ComplexityConfig config = cycled_config(trial);
  config.kappa_floor = 1e-300;  // the floor is not rescaling-covariant
  Batch batch = regression_batch(rng, inst);
  Eigen::MatrixXd probes = random_inputs(rng, 64, static_cast<int>(inst.inputs.cols()));
  const std::vector<int>& internals = inst.topo.internal_nodes();
  int node = internals[rng.below(internals.size())];
  double scale = 0.0;
  Eigen::MatrixXd out = network_outputs(inst.topo, inst.w, probes);
  scale = std::max(1.0, out.cwiseAbs().maxCoeff());
  double max_err = 0.0;
  for (double rho : {0.1, 0.5, 2.0, 10.0}) {
    double d = verify_rescaling_invariance(inst.topo, inst.w, batch, LossKind::Squared, config,
                                           0.05, node, rho, probes);
    max_err = std::max(max_err, d / scale);
  }
  return {0, max_err, 1e-8, false, "one-step DDP-SGD commutes with node rescaling"};
}

TrialResult rank_trial(Rng& rng, int trial) {
  const std::vector<int>& shape = kShapes[trial % kShapes.size()];
  NetworkTopology topo = NetworkTopology::layered(shape);
  WeightVector w(topo.edge_count());
  for (int e = 0; e < w.size(); ++e) w[e] = rng.uniform(0.5, 1.5);
  PathSet paths = enumerate_paths(topo);
  PathJacobian pj = path_jacobian(paths, topo, w);
  int r = numerical_rank(pj.J);
  int predicted = generic_rank_prediction(topo);
  return {0, static_cast<double>(std::abs(r - predicted)), 0.0, false,
          "rank(J) vs |E| - |V_int| on " + std::to_string(shape.size()) + "-layer net"};
}

TrialResult gradcheck_trial(Rng& rng, int trial) {
  ComplexityConfig config = cycled_config(trial);
  Instance inst = sample_normalized_instance(rng, 8, config);
  Batch batch = regression_batch(rng, inst);
  double max_err = 0.0;
  auto relerr = [&](const WeightVector& got, const WeightVector& ref) {
    for (int e = 0; e < got.size(); ++e)
      if (std::abs(ref[e]) > 1e-8)
        max_err = std::max(max_err, std::abs(got[e] - ref[e]) / std::abs(ref[e]));
  };
  LossGrad lg = loss_gradient(inst.topo, inst.w, batch, LossKind::Squared);
  relerr(lg.grad, oracles::finite_difference_gradient(
                      [&](const WeightVector& w) {
                        return loss_value(network_outputs(inst.topo, w, batch.inputs), batch,
                                          LossKind::Squared);
                      },
                      inst.w));
  LossGrad ng = ddpnorm_gradient(inst.topo, inst.w, batch, LossKind::Squared, config);
  relerr(ng.grad, oracles::finite_difference_gradient(
                      [&](const WeightVector& tw) {
                        NormalizedActivations act =
                            normalized_forward(inst.topo, tw, batch.inputs, config);
                        const std::vector<int>& outs = inst.topo.output_nodes();
                        Eigen::MatrixXd f(act.size(), outs.size());
                        for (std::size_t j = 0; j < outs.size(); ++j)
                          f.col(static_cast<int>(j)) = act.z.col(outs[j]);
                        return loss_value(f, batch, LossKind::Squared);
                      },
                      inst.w));
  return {0, max_err, 1e-5, false, "analytic vs central-difference gradients"};
}

TrialResult reconstruction_trial(Rng& rng, int) {
  Instance inst = sample_instance(rng, 4);
  PathSet paths = enumerate_paths(inst.topo);
  PathJacobian pj = path_jacobian(paths, inst.topo, inst.w);
  double max_err = 0.0;
  for (int i = 0; i < inst.inputs.rows(); ++i) {
    Eigen::VectorXd x = inst.inputs.row(i);
    Eigen::VectorXd phi = path_features(paths, inst.topo, inst.w, x);
    Eigen::MatrixXd out = network_outputs(inst.topo, inst.w, x.transpose());
    const std::vector<int>& outs = inst.topo.output_nodes();
    for (std::size_t oi = 0; oi < outs.size(); ++oi) {
      double sum = 0.0;
      for (int p = 0; p < paths.size(); ++p)
        if (paths.tail[p] == outs[oi]) sum += pj.pi[p] * phi[p];
      max_err = std::max(max_err, std::abs(sum - out(0, static_cast<int>(oi))) /
                                      std::max(1e-12, std::abs(out(0, static_cast<int>(oi)))));
    }
  }
  // factorization J = diag(1/w) M diag(pi), entrywise (weights are kink-clear,
  // hence nonzero)
  Eigen::MatrixXd fact = pj.pi.asDiagonal() * pj.M;
  for (int e = 0; e < inst.w.size(); ++e) fact.col(e) /= inst.w[e];
  double fmax = (fact - pj.J).cwiseAbs().maxCoeff();
  max_err = std::max(max_err, fmax / 1e-2);  // 1e-12 gate scaled to the 1e-10 tolerance
  return {0, max_err, 1e-10, false, "sum_p pi_p phi_p vs f(x); J = diag(1/w) M diag(pi)"};
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "orthogonality", "natgrad-equivalence", "pathsgd-equivalence", "rescaling",
      "rank",          "gradcheck",           "reconstruction"};
  return names;
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed, int trials) {
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  if (name == "orthogonality") return run_trials(name, seed, trials, orthogonality_trial);
  if (name == "natgrad-equivalence") return run_trials(name, seed, trials, natgrad_trial);
  if (name == "pathsgd-equivalence") return run_trials(name, seed, trials, pathsgd_trial);
  if (name == "rescaling") return run_trials(name, seed, trials, rescaling_trial);
  if (name == "rank") return run_trials(name, seed, trials, rank_trial);
  if (name == "gradcheck") return run_trials(name, seed, trials, gradcheck_trial);
  if (name == "reconstruction") return run_trials(name, seed, trials, reconstruction_trial);
  throw ConfigError("suite", "unknown suite '" + name + "'");
}

std::vector<SuiteResult> run_suites(const std::string& name, std::uint64_t seed, int trials) {
  std::vector<SuiteResult> out;
  if (name == "all") {
    for (const std::string& s : suite_names()) out.push_back(run_suite(s, seed, trials));
  } else {
    out.push_back(run_suite(name, seed, trials));
  }
  return out;
}

}  // namespace ddp
