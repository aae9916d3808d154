#include "ddp/kappa.hpp"

namespace ddp {

Eigen::VectorXd gamma_net_adjoint(const NetworkTopology& topo, const WeightVector& w,
                                  const ComplexityConfig& config) {
  Eigen::VectorXd dgamma = Eigen::VectorXd::Zero(topo.node_count());
  const std::vector<int>& order = topo.topo_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    if (topo.kind(v) == NodeKind::Output) {
      dgamma[v] = 1.0;
      continue;
    }
    double acc = 0.0;
    for (int e : topo.out_edges(v)) acc += dgamma[topo.edges()[e].dst] * w[e] * w[e];
    dgamma[v] = (1.0 - config.alpha) * acc;
  }
  return dgamma;
}

WeightVector kappa(const NetworkTopology& topo, const WeightVector& w,
                   const Eigen::MatrixXd& stats_inputs, const ComplexityConfig& config) {
  config.check();
  const int n = static_cast<int>(stats_inputs.rows());
  if (config.alpha > 0.0 && n == 0) throw Error("empty batch with alpha > 0");

  Eigen::VectorXd dgamma = gamma_net_adjoint(topo, w, config);
  ActivationRecord act = forward(topo, w, stats_inputs);
  NodeGamma gamma = gamma_forward(topo, w, act, config);

  WeightVector kap(topo.edge_count());
  for (int e = 0; e < topo.edge_count(); ++e)
    kap[e] = (1.0 - config.alpha) * dgamma[topo.edges()[e].dst] *
             gamma.gamma_sq[topo.edges()[e].src];

  if (config.alpha > 0.0) {
    const int nv = topo.node_count();
    // gated per-example output, used when propagating a perturbation
    Eigen::MatrixXd gates(n, nv);
    for (int v = 0; v < nv; ++v)
      if (topo.kind(v) == NodeKind::Internal)
        gates.col(v) = (act.z.col(v).array() > 0.0).cast<double>();
      else
        gates.col(v).setOnes();

    for (int v : topo.topo_order()) {
      NodeKind k = topo.kind(v);
      if (k == NodeKind::Input || k == NodeKind::Bias) continue;
      // D(i,a) = dz_a^{(i)} / dz_v^{(i)} at fixed gates
      Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, nv);
      D.col(v).setOnes();
      bool past_v = false;
      for (int c : topo.topo_order()) {
        if (c == v) {
          past_v = true;
          continue;
        }
        if (!past_v) continue;
        for (int e : topo.in_edges(c)) {
          int b = topo.edges()[e].src;
          if (topo.topo_index(b) < topo.topo_index(v)) continue;
          D.col(c) += w[e] * (gates.col(b).array() * D.col(b).array()).matrix();
        }
      }
      // kappa contribution of edge (u->v): alpha * sum_a dgamma_a * S(h_u .* D_a)
      for (int e : topo.in_edges(v)) {
        int u = topo.edges()[e].src;
        double acc = 0.0;
        for (int a = 0; a < nv; ++a) {
          NodeKind ka = topo.kind(a);
          if (ka == NodeKind::Input || ka == NodeKind::Bias) continue;
          if (dgamma[a] == 0.0 || (a != v && topo.topo_index(a) < topo.topo_index(v))) continue;
          Eigen::VectorXd s = act.h.col(u).cwiseProduct(D.col(a));
          acc += dgamma[a] * batch_statistic(s, config.s_mode);
        }
        kap[e] += config.alpha * acc;
      }
    }
  }

  if (!kap.allFinite()) throw Error("non-finite kappa");
  return kap.cwiseMax(config.kappa_floor);
}

WeightVector ddp_sgd_step(const WeightVector& w, const WeightVector& grad,
                          const WeightVector& kappa, double eta) {
  if (eta < 0.0) throw Error("step size eta must be non-negative");
  if (grad.size() != w.size() || kappa.size() != w.size())
    throw Error("gradient/kappa not aligned with weights");
  return w - eta * grad.cwiseQuotient(kappa);
}

double verify_rescaling_invariance(const NetworkTopology& topo, const WeightVector& w,
                                   const Batch& batch, LossKind loss,
                                   const ComplexityConfig& config, double eta, int node,
                                   double rho, const Eigen::MatrixXd& probe_inputs) {
  auto one_step = [&](const WeightVector& weights) {
    LossGrad lg = loss_gradient(topo, weights, batch, loss);
    WeightVector kap = kappa(topo, weights, batch.inputs, config);
    return ddp_sgd_step(weights, lg.grad, kap, eta);
  };
  WeightVector stepped = one_step(w);
  WeightVector stepped_rescaled = one_step(apply_node_rescaling(topo, w, node, rho));
  return function_distance(topo, stepped, stepped_rescaled, probe_inputs);
}

}  // namespace ddp
