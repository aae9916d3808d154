#pragma once

#include "ddp/complexity.hpp"

namespace ddp {

/// Forward pass of the normalized parameterization: each internal node's
/// pre-activation is divided by tilde_gamma_v before the ReLU, output nodes
/// are left unnormalized.
struct NormalizedActivations {
  Eigen::MatrixXd ztilde;        // n x |V|, unnormalized pre-activations
  Eigen::MatrixXd z;             // n x |V|, normalized pre-activations
  Eigen::MatrixXd h;             // n x |V|, node outputs
  Eigen::VectorXd gamma_tilde_sq;  // per node, 1 at non-internal nodes

  int size() const { return static_cast<int>(z.rows()); }
};

NormalizedActivations normalized_forward(const NetworkTopology& topo, const WeightVector& tilde_w,
                                         const Eigen::MatrixXd& inputs,
                                         const ComplexityConfig& config);

// tilde_gamma^2_v = (1-alpha)*||w~_{->v}||^2 + alpha*S(z~_v) per internal node
Eigen::VectorXd tilde_gamma(const NetworkTopology& topo, const WeightVector& tilde_w,
                            const Eigen::MatrixXd& inputs, const ComplexityConfig& config);

// w_{u->v} = w~_{u->v} / tilde_gamma_v at internal v, w = w~ into outputs
WeightVector realize_weights(const NetworkTopology& topo, const WeightVector& tilde_w,
                             const Eigen::VectorXd& gamma_tilde_sq);

// Exact batch-loss gradient w.r.t. tilde_w, with the batch statistics treated
// as functions of tilde_w.
LossGrad ddpnorm_gradient(const NetworkTopology& topo, const WeightVector& tilde_w,
                          const Batch& batch, LossKind loss, const ComplexityConfig& config);

WeightVector sgd_step_tilde(const WeightVector& tilde_w, const WeightVector& grad, double eta);

}  // namespace ddp
