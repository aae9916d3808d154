#include "ddp/netgraph.hpp"

#include <cmath>

#include "ddp/rng.hpp"

namespace ddp {

namespace {

void check_aligned(const NetworkTopology& topo, const WeightVector& w) {
  if (w.size() != topo.edge_count())
    throw Error("weight vector length " + std::to_string(w.size()) + " != |E| = " +
                std::to_string(topo.edge_count()));
}

}  // namespace

ActivationRecord forward(const NetworkTopology& topo, const WeightVector& w,
                         const Eigen::MatrixXd& inputs) {
  check_aligned(topo, w);
  if (inputs.cols() != topo.input_count())
    throw Error("batch width " + std::to_string(inputs.cols()) + " != |V_in| = " +
                std::to_string(topo.input_count()));
  const int n = static_cast<int>(inputs.rows());
  ActivationRecord act;
  act.z = Eigen::MatrixXd::Zero(n, topo.node_count());
  act.h = Eigen::MatrixXd::Zero(n, topo.node_count());

  int input_col = 0;
  for (int v : topo.input_nodes()) {
    act.z.col(v) = inputs.col(input_col);
    act.h.col(v) = inputs.col(input_col);
    ++input_col;
  }
  if (topo.bias_node() >= 0) {
    act.z.col(topo.bias_node()).setOnes();
    act.h.col(topo.bias_node()).setOnes();
  }
  for (int v : topo.topo_order()) {
    if (topo.kind(v) == NodeKind::Input || topo.kind(v) == NodeKind::Bias) continue;
    for (int e : topo.in_edges(v)) act.z.col(v) += w[e] * act.h.col(topo.edges()[e].src);
    if (!act.z.col(v).allFinite())
      throw Error("non-finite pre-activation at node '" + topo.name(v) + "'");
    if (topo.kind(v) == NodeKind::Internal)
      act.h.col(v) = act.z.col(v).cwiseMax(0.0);
    else
      act.h.col(v) = act.z.col(v);
  }
  return act;
}

Eigen::MatrixXd network_outputs(const NetworkTopology& topo, const ActivationRecord& act) {
  Eigen::MatrixXd f(act.size(), topo.output_count());
  int c = 0;
  for (int v : topo.output_nodes()) f.col(c++) = act.z.col(v);
  return f;
}

Eigen::MatrixXd network_outputs(const NetworkTopology& topo, const WeightVector& w,
                                const Eigen::MatrixXd& inputs) {
  return network_outputs(topo, forward(topo, w, inputs));
}

namespace {

// per-example dl/dz at the outputs, n x |V_out|, already scaled by 1/n
Eigen::MatrixXd output_loss_grad(const Eigen::MatrixXd& f, const Batch& batch, LossKind kind,
                                 double* loss_out) {
  const int n = static_cast<int>(f.rows());
  Eigen::MatrixXd dz(n, f.cols());
  double loss = 0.0;
  if (kind == LossKind::Squared) {
    if (batch.targets.rows() != n || batch.targets.cols() != f.cols())
      throw Error("squared loss needs targets of shape n x |V_out|");
    Eigen::MatrixXd r = f - batch.targets;
    loss = 0.5 * r.squaredNorm() / n;
    dz = r / n;
  } else {
    if (batch.labels.size() != n) throw Error("cross-entropy loss needs class labels");
    for (int i = 0; i < n; ++i) {
      int y = batch.labels[i];
      if (y < 0 || y >= f.cols()) throw Error("class label out of range");
      Eigen::VectorXd row = f.row(i);
      double m = row.maxCoeff();
      Eigen::VectorXd p = (row.array() - m).exp();
      p /= p.sum();
      loss += -std::log(std::max(p[y], 1e-300)) / n;
      dz.row(i) = p.transpose() / n;
      dz(i, y) -= 1.0 / n;
    }
  }
  if (loss_out) *loss_out = loss;
  return dz;
}

}  // namespace

double loss_value(const Eigen::MatrixXd& outputs, const Batch& batch, LossKind kind) {
  double loss = 0.0;
  output_loss_grad(outputs, batch, kind, &loss);
  return loss;
}

LossGrad loss_gradient(const NetworkTopology& topo, const WeightVector& w, const Batch& batch,
                       LossKind kind) {
  ActivationRecord act = forward(topo, w, batch.inputs);
  Eigen::MatrixXd f = network_outputs(topo, act);
  double loss = 0.0;
  Eigen::MatrixXd df = output_loss_grad(f, batch, kind, &loss);

  const int n = batch.size();
  Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(n, topo.node_count());
  int c = 0;
  for (int v : topo.output_nodes()) dz.col(v) = df.col(c++);

  LossGrad out;
  out.loss = loss;
  out.grad = WeightVector::Zero(topo.edge_count());
  const std::vector<int>& order = topo.topo_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    NodeKind k = topo.kind(v);
    if (k == NodeKind::Input || k == NodeKind::Bias) continue;
    if (k == NodeKind::Internal) {
      // ReLU subgradient at z == 0 is 0
      dz.col(v) = (act.z.col(v).array() > 0.0).cast<double>() * dz.col(v).array();
    }
    for (int e : topo.in_edges(v)) {
      int u = topo.edges()[e].src;
      out.grad[e] = dz.col(v).dot(act.h.col(u));
      dz.col(u) += w[e] * dz.col(v);
    }
  }
  return out;
}

WeightVector apply_node_rescaling(const NetworkTopology& topo, const WeightVector& w, int node,
                                  double rho) {
  check_aligned(topo, w);
  if (topo.kind(node) != NodeKind::Internal)
    throw Error("node-wise rescaling requires an internal node, got '" + topo.name(node) + "'");
  if (!(rho > 0.0)) throw Error("rescaling factor must be positive");
  WeightVector out = w;
  for (int e : topo.in_edges(node)) out[e] = w[e] / rho;
  for (int e : topo.out_edges(node)) out[e] = w[e] * rho;
  return out;
}

double function_distance(const NetworkTopology& topo, const WeightVector& w1,
                         const WeightVector& w2, const Eigen::MatrixXd& probe_inputs) {
  if (probe_inputs.rows() == 0) throw Error("function_distance needs at least one probe input");
  Eigen::MatrixXd f1 = network_outputs(topo, w1, probe_inputs);
  Eigen::MatrixXd f2 = network_outputs(topo, w2, probe_inputs);
  return (f1 - f2).cwiseAbs().maxCoeff();
}

WeightVector init_weights(const NetworkTopology& topo, Rng& rng) {
  WeightVector w(topo.edge_count());
  for (int e = 0; e < topo.edge_count(); ++e) {
    int dst = topo.edges()[e].dst;
    double half = std::sqrt(2.0 / static_cast<double>(topo.in_edges(dst).size()));
    w[e] = rng.uniform(-half, half);
  }
  return w;
}

}  // namespace ddp
