#include "ddp/complexity.hpp"

#include <algorithm>

namespace ddp {

double batch_statistic(const Eigen::VectorXd& values, SMode mode) {
  const double n = static_cast<double>(values.size());
  double m2 = values.squaredNorm() / n;
  if (mode == SMode::SecondMoment) return m2;
  double mean = values.sum() / n;
  return std::max(0.0, m2 - mean * mean);
}

Eigen::MatrixXd estimate_R(const NetworkTopology& topo, const ActivationRecord& act,
                           const NodeGamma& gamma, int node, const ComplexityConfig& config) {
  config.check();
  const std::vector<int>& in = topo.in_edges(node);
  if (in.empty()) throw Error("node '" + topo.name(node) + "' has no fan-in");
  const int k = static_cast<int>(in.size());
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(k, k);
  for (int a = 0; a < k; ++a)
    R(a, a) += (1.0 - config.alpha) * gamma.gamma_sq[topo.edges()[in[a]].src];
  if (config.alpha > 0.0) {
    const int n = act.size();
    if (n == 0) throw Error("empty batch with alpha > 0");
    Eigen::MatrixXd H(n, k);
    for (int a = 0; a < k; ++a) H.col(a) = act.h.col(topo.edges()[in[a]].src);
    if (config.s_mode == SMode::Variance) H.rowwise() -= H.colwise().mean();
    R += (config.alpha / n) * (H.transpose() * H);
  }
  return R;
}

NodeGamma gamma_forward(const NetworkTopology& topo, const WeightVector& w,
                        const ActivationRecord& act, const ComplexityConfig& config) {
  config.check();
  if (config.alpha > 0.0 && act.size() == 0) throw Error("empty batch with alpha > 0");
  NodeGamma g;
  g.gamma_sq = Eigen::VectorXd::Zero(topo.node_count());
  for (int v : topo.topo_order()) {
    NodeKind k = topo.kind(v);
    if (k == NodeKind::Input || k == NodeKind::Bias) {
      g.gamma_sq[v] = config.input_gamma_sq;
      continue;
    }
    double acc = 0.0;
    for (int e : topo.in_edges(v)) acc += g.gamma_sq[topo.edges()[e].src] * w[e] * w[e];
    g.gamma_sq[v] = (1.0 - config.alpha) * acc;
    if (config.alpha > 0.0)
      g.gamma_sq[v] += config.alpha * batch_statistic(act.z.col(v), config.s_mode);
  }
  return g;
}

NodeGamma gamma_forward(const NetworkTopology& topo, const WeightVector& w,
                        const Eigen::MatrixXd& inputs, const ComplexityConfig& config) {
  return gamma_forward(topo, w, forward(topo, w, inputs), config);
}

double gamma_net(const NodeGamma& gamma, const NetworkTopology& topo) {
  double s = 0.0;
  for (int v : topo.output_nodes()) s += gamma.gamma_sq[v];
  return s;
}

}  // namespace ddp
