#pragma once

#include <functional>

#include "ddp/netgraph.hpp"

namespace ddp {
// Brute-force reference computations used as test oracles. Independent of the
// derivative code they check: only the plain forward pass is shared.
namespace oracles {

struct FiniteDiffSpec {
  double step = 0.0;          // 0 picks the per-coordinate default
  double kink_margin = 1e-4;  // min |z_v| on the batch for an admissible point

  void check() const {
    if (step < 0.0) throw Error("finite-difference step must be nonnegative");
    if (!(kink_margin > 0.0)) throw Error("kink margin must be positive");
  }
};

using ScalarFn = std::function<double(const WeightVector&)>;

// min over internal nodes and batch rows of |z|; test points below the margin
// are inadmissible (too close to a ReLU kink) and must be resampled.
double kink_clearance(const NetworkTopology& topo, const WeightVector& w,
                      const Eigen::MatrixXd& inputs);

// central differences per coordinate, default h = eps^(1/3) * max(1,|w_e|)
WeightVector finite_difference_gradient(const ScalarFn& f, const WeightVector& w,
                                        const FiniteDiffSpec& spec = {});

// 1/2 * second central difference per coordinate, default h = eps^(1/4) * max(1,|w_e|)
WeightVector half_second_difference(const ScalarFn& f, const WeightVector& w,
                                    const FiniteDiffSpec& spec = {});

// rows are df_w(x)[v'] / dw, one backward pass per output; x is one example
Eigen::MatrixXd per_output_jacobian(const NetworkTopology& topo, const WeightVector& w,
                                    const Eigen::VectorXd& x);

// diag of the Fisher matrix for the Gaussian output model, empirical over the
// batch: F[e,e] = (1/n) sum_i sum_out (df[out]/dw_e)^2
WeightVector diagonal_fisher_gaussian(const NetworkTopology& topo, const WeightVector& w,
                                      const Eigen::MatrixXd& inputs);

// sum over input/bias->output paths through `edge` of the squared weight
// product over the path's other edges (own DFS, no shared path machinery)
double brute_force_path_kappa(const NetworkTopology& topo, const WeightVector& w, int edge,
                              unsigned long long path_limit = 100000);

// l2 path regularizer: sum over all paths of prod w^2, input gamma^2 applied at heads
double brute_force_path_regularizer(const NetworkTopology& topo, const WeightVector& w,
                                    double input_gamma_sq = 1.0,
                                    unsigned long long path_limit = 100000);

}  // namespace oracles
}  // namespace ddp
