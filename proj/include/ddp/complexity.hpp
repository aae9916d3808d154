#pragma once

#include "ddp/netgraph.hpp"

namespace ddp {

enum class SMode { Variance, SecondMoment };

/// Selects the fan-in matrix R_v = alpha*(C or M) + (1-alpha)*diag(gamma^2).
struct ComplexityConfig {
  double alpha = 0.0;
  SMode s_mode = SMode::SecondMoment;
  double input_gamma_sq = 1.0;  // gamma^2 at input and bias nodes
  double kappa_floor = 1e-6;

  void check() const {
    if (alpha < 0.0 || alpha > 1.0) throw Error("alpha must be in [0,1]");
    if (!(input_gamma_sq > 0.0)) throw Error("input_gamma_sq must be positive");
    if (!(kappa_floor > 0.0)) throw Error("kappa_floor must be positive");
  }
};

struct NodeGamma {
  Eigen::VectorXd gamma_sq;  // per node
};

// Empirical fan-in matrix for node v, rows/cols in in-edge order (1/n moments).
Eigen::MatrixXd estimate_R(const NetworkTopology& topo, const ActivationRecord& act,
                           const NodeGamma& gamma, int node, const ComplexityConfig& config);

// gamma^2 per node via the single-pass recursion
//   gamma^2_v = alpha*S(z_v) + (1-alpha)*sum_u gamma^2_u w_{u->v}^2
NodeGamma gamma_forward(const NetworkTopology& topo, const WeightVector& w,
                        const ActivationRecord& act, const ComplexityConfig& config);
NodeGamma gamma_forward(const NetworkTopology& topo, const WeightVector& w,
                        const Eigen::MatrixXd& inputs, const ComplexityConfig& config);

// sum of gamma^2 over output nodes
double gamma_net(const NodeGamma& gamma, const NetworkTopology& topo);

// batch statistic S over a column of values, 1/n normalization
double batch_statistic(const Eigen::VectorXd& values, SMode mode);

}  // namespace ddp
