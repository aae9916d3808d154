#pragma once

#include <Eigen/Core>

#include "ddp/topology.hpp"

namespace ddp {

using WeightVector = Eigen::VectorXd;

/// Labeled minibatch. `targets` is n x |V_out| (squared loss), `labels` holds
/// class indices (softmax cross-entropy). Either may be empty.
struct Batch {
  Eigen::MatrixXd inputs;   // n x |V_in|
  Eigen::MatrixXd targets;  // n x |V_out| or 0x0
  Eigen::VectorXi labels;   // n or 0

  int size() const { return static_cast<int>(inputs.rows()); }
};

/// Per-example pre-activations and outputs, n x |V| each, columns indexed by
/// node. h = z at inputs/outputs, h = max(z,0) at internal nodes, h = 1 at the
/// bias node.
struct ActivationRecord {
  Eigen::MatrixXd z;
  Eigen::MatrixXd h;

  int size() const { return static_cast<int>(z.rows()); }
};

enum class LossKind { Squared, SoftmaxCrossEntropy };

ActivationRecord forward(const NetworkTopology& topo, const WeightVector& w,
                         const Eigen::MatrixXd& inputs);

// f_w(x): the z-rows restricted to V_out, n x |V_out|.
Eigen::MatrixXd network_outputs(const NetworkTopology& topo, const ActivationRecord& act);
Eigen::MatrixXd network_outputs(const NetworkTopology& topo, const WeightVector& w,
                                const Eigen::MatrixXd& inputs);

struct LossGrad {
  double loss;
  WeightVector grad;  // (1/n) sum_i dl/dw, edge-aligned
};

double loss_value(const Eigen::MatrixXd& outputs, const Batch& batch, LossKind kind);
LossGrad loss_gradient(const NetworkTopology& topo, const WeightVector& w, const Batch& batch,
                       LossKind kind);

// Node-wise rescaling at internal node v: outgoing weights scaled by rho,
// incoming by 1/rho. Leaves f_w unchanged.
WeightVector apply_node_rescaling(const NetworkTopology& topo, const WeightVector& w, int node,
                                  double rho);

// max over probe rows and output coordinates of |f_w1(x) - f_w2(x)|
double function_distance(const NetworkTopology& topo, const WeightVector& w1,
                         const WeightVector& w2, const Eigen::MatrixXd& probe_inputs);

// Zero-mean uniform init with half-width sqrt(2/fan-in(dst)) per edge.
WeightVector init_weights(const NetworkTopology& topo, class Rng& rng);

}  // namespace ddp
