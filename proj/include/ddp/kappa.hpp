#pragma once

#include "ddp/complexity.hpp"

namespace ddp {

/// Per-edge curvature kappa_e = 1/2 d^2 gamma^2_net / dw_e^2, floored at
/// kappa_floor. Computed by one reverse pass for dgamma^2_net/dgamma^2_v plus
/// a per-source sensitivity propagation for the data-dependent terms; the
/// activation gates are treated as locally constant.
WeightVector kappa(const NetworkTopology& topo, const WeightVector& w,
                   const Eigen::MatrixXd& stats_inputs, const ComplexityConfig& config);

// dgamma^2_net / dgamma^2_v for every node (1 at outputs).
Eigen::VectorXd gamma_net_adjoint(const NetworkTopology& topo, const WeightVector& w,
                                  const ComplexityConfig& config);

// w - eta * grad / kappa, elementwise
WeightVector ddp_sgd_step(const WeightVector& w, const WeightVector& grad,
                          const WeightVector& kappa, double eta);

// One DDP-SGD step from w and one from the rho-rescaled weights; returns the
// function distance between the two resulting networks over the probes.
double verify_rescaling_invariance(const NetworkTopology& topo, const WeightVector& w,
                                   const Batch& batch, LossKind loss,
                                   const ComplexityConfig& config, double eta, int node,
                                   double rho, const Eigen::MatrixXd& probe_inputs);

}  // namespace ddp
