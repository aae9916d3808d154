#include "ddp/ddpnorm.hpp"

#include <cmath>

namespace ddp {

NormalizedActivations normalized_forward(const NetworkTopology& topo, const WeightVector& tilde_w,
                                         const Eigen::MatrixXd& inputs,
                                         const ComplexityConfig& config) {
  config.check();
  const int n = static_cast<int>(inputs.rows());
  if (n == 0) throw Error("normalized forward needs a non-empty batch");
  if (inputs.cols() != topo.input_count()) throw Error("batch width != |V_in|");

  NormalizedActivations act;
  act.ztilde = Eigen::MatrixXd::Zero(n, topo.node_count());
  act.z = Eigen::MatrixXd::Zero(n, topo.node_count());
  act.h = Eigen::MatrixXd::Zero(n, topo.node_count());
  act.gamma_tilde_sq = Eigen::VectorXd::Ones(topo.node_count());

  int input_col = 0;
  for (int v : topo.input_nodes()) {
    act.ztilde.col(v) = act.z.col(v) = act.h.col(v) = inputs.col(input_col++);
  }
  if (topo.bias_node() >= 0) {
    act.ztilde.col(topo.bias_node()).setOnes();
    act.z.col(topo.bias_node()).setOnes();
    act.h.col(topo.bias_node()).setOnes();
  }
  const double eps = config.kappa_floor;
  for (int v : topo.topo_order()) {
    NodeKind k = topo.kind(v);
    if (k == NodeKind::Input || k == NodeKind::Bias) continue;
    double wnorm_sq = 0.0;
    for (int e : topo.in_edges(v)) {
      act.ztilde.col(v) += tilde_w[e] * act.h.col(topo.edges()[e].src);
      wnorm_sq += tilde_w[e] * tilde_w[e];
    }
    if (!act.ztilde.col(v).allFinite())
      throw Error("non-finite pre-activation at node '" + topo.name(v) + "'");
    if (k == NodeKind::Output) {
      act.z.col(v) = act.ztilde.col(v);
      act.h.col(v) = act.z.col(v);
      continue;
    }
    double g2 = (1.0 - config.alpha) * wnorm_sq +
                config.alpha * batch_statistic(act.ztilde.col(v), config.s_mode);
    if (!(g2 > eps * eps))
      throw Error("degenerate normalization at node '" + topo.name(v) +
                  "': tilde_gamma^2 = " + std::to_string(g2));
    act.gamma_tilde_sq[v] = g2;
    act.z.col(v) = act.ztilde.col(v) / std::sqrt(g2);
    act.h.col(v) = act.z.col(v).cwiseMax(0.0);
  }
  return act;
}

Eigen::VectorXd tilde_gamma(const NetworkTopology& topo, const WeightVector& tilde_w,
                            const Eigen::MatrixXd& inputs, const ComplexityConfig& config) {
  return normalized_forward(topo, tilde_w, inputs, config).gamma_tilde_sq;
}

WeightVector realize_weights(const NetworkTopology& topo, const WeightVector& tilde_w,
                             const Eigen::VectorXd& gamma_tilde_sq) {
  WeightVector w = tilde_w;
  for (int e = 0; e < topo.edge_count(); ++e) {
    int dst = topo.edges()[e].dst;
    if (topo.kind(dst) != NodeKind::Internal) continue;
    double g2 = gamma_tilde_sq[dst];
    if (!(g2 > 0.0)) throw Error("zero tilde_gamma at node '" + topo.name(dst) + "'");
    w[e] /= std::sqrt(g2);
  }
  return w;
}

LossGrad ddpnorm_gradient(const NetworkTopology& topo, const WeightVector& tilde_w,
                          const Batch& batch, LossKind loss, const ComplexityConfig& config) {
  NormalizedActivations act = normalized_forward(topo, tilde_w, batch.inputs, config);
  const int n = batch.size();

  Eigen::MatrixXd f(n, topo.output_count());
  int c = 0;
  for (int v : topo.output_nodes()) f.col(c++) = act.z.col(v);

  LossGrad out;
  out.grad = WeightVector::Zero(topo.edge_count());

  // dl/df, already scaled by 1/n
  Eigen::MatrixXd df(n, topo.output_count());
  if (loss == LossKind::Squared) {
    if (batch.targets.rows() != n || batch.targets.cols() != f.cols())
      throw Error("squared loss needs targets of shape n x |V_out|");
    Eigen::MatrixXd r = f - batch.targets;
    out.loss = 0.5 * r.squaredNorm() / n;
    df = r / n;
  } else {
    if (batch.labels.size() != n) throw Error("cross-entropy loss needs class labels");
    out.loss = 0.0;
    for (int i = 0; i < n; ++i) {
      int y = batch.labels[i];
      Eigen::VectorXd row = f.row(i);
      double m = row.maxCoeff();
      Eigen::VectorXd p = (row.array() - m).exp();
      p /= p.sum();
      out.loss += -std::log(std::max(p[y], 1e-300)) / n;
      df.row(i) = p.transpose() / n;
      df(i, y) -= 1.0 / n;
    }
  }

  // dL/dh accumulated from downstream consumers
  Eigen::MatrixXd dh = Eigen::MatrixXd::Zero(n, topo.node_count());
  Eigen::MatrixXd dout = Eigen::MatrixXd::Zero(n, topo.node_count());
  c = 0;
  for (int v : topo.output_nodes()) dout.col(v) = df.col(c++);

  const std::vector<int>& order = topo.topo_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    NodeKind k = topo.kind(v);
    if (k == NodeKind::Input || k == NodeKind::Bias) continue;
    if (k == NodeKind::Output) {
      for (int e : topo.in_edges(v)) {
        int u = topo.edges()[e].src;
        out.grad[e] = dout.col(v).dot(act.h.col(u));
        dh.col(u) += tilde_w[e] * dout.col(v);
      }
      continue;
    }
    // internal, normalized node
    Eigen::VectorXd dz =
        (act.z.col(v).array() > 0.0).cast<double>() * dh.col(v).array();  // dL/dz_v
    const double g2 = act.gamma_tilde_sq[v];
    const double g = std::sqrt(g2);
    const double dgam2 = -0.5 / (g2 * g) * dz.dot(act.ztilde.col(v));
    // dS/dztilde
    Eigen::VectorXd dS;
    if (config.s_mode == SMode::SecondMoment) {
      dS = (2.0 / n) * act.ztilde.col(v);
    } else {
      double mean = act.ztilde.col(v).mean();
      dS = (2.0 / n) * (act.ztilde.col(v).array() - mean).matrix();
    }
    Eigen::VectorXd dzt = dz / g + (dgam2 * config.alpha) * dS;
    for (int e : topo.in_edges(v)) {
      int u = topo.edges()[e].src;
      out.grad[e] = dzt.dot(act.h.col(u)) + dgam2 * 2.0 * (1.0 - config.alpha) * tilde_w[e];
      dh.col(u) += tilde_w[e] * dzt;
    }
  }
  return out;
}

WeightVector sgd_step_tilde(const WeightVector& tilde_w, const WeightVector& grad, double eta) {
  if (!(eta > 0.0)) throw Error("step size eta must be positive");
  if (grad.size() != tilde_w.size()) throw Error("gradient not aligned with weights");
  return tilde_w - eta * grad;
}

}  // namespace ddp
