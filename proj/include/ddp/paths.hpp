#pragma once

#include <functional>

#include "ddp/netgraph.hpp"

namespace ddp {

/// All input/bias->output directed paths, stored as edge-index sequences in
/// lexicographic order.
struct PathSet {
  std::vector<std::vector<int>> edges;  // per path, canonical edge indices
  std::vector<int> head;                // first node of each path
  std::vector<int> tail;                // output node of each path

  int size() const { return static_cast<int>(edges.size()); }
};

/// J[p,e] = d pi_p / d w_e, pi_p = product of weights along path p, M = 0/1
/// path-incidence matrix (paths x edges).
struct PathJacobian {
  Eigen::MatrixXd J;
  Eigen::VectorXd pi;
  Eigen::MatrixXd M;
};

/// Distance m(z,z') between output vectors, with m(z,z)=0 and zero gradient at
/// z=z'; only the Hessian at z'=z enters the analysis. Default: ||z-z'||^2.
struct MetricSpec {
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;

  static MetricSpec squared_distance();
};

PathSet enumerate_paths(const NetworkTopology& topo, unsigned long long limit = 100000);

// number of input/bias->output paths without enumerating them (saturating)
unsigned long long count_paths(const NetworkTopology& topo);

// phi_p(x) = g_p(x) * x[head(p)], where g_p = 1 iff every internal node on p
// has z > 0; bias-headed paths use x[head] = 1
Eigen::VectorXd path_features(const PathSet& paths, const NetworkTopology& topo,
                              const WeightVector& w, const Eigen::VectorXd& x);

PathJacobian path_jacobian(const PathSet& paths, const NetworkTopology& topo,
                           const WeightVector& w);

// count of singular values > rel_tol * sigma_max
int numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-8);

// Generic rank of the path Jacobian: |E| - |V_internal|
int generic_rank_prediction(const NetworkTopology& topo);

struct DegreesOfFreedom {
  int d_G;       // rank of the stacked per-output Jacobians over the probes
  int dim_N;     // |E| - d_G
  int probe_count;
  bool enough_probes;  // probe_count >= |E|
};

DegreesOfFreedom degrees_of_freedom(const NetworkTopology& topo, const WeightVector& w,
                                    const Eigen::MatrixXd& probe_inputs, double rel_tol = 1e-8);

struct DistributionFisher {
  Eigen::MatrixXd F;  // |E| x |E|
  int rank;           // d_{G,D}(w)
};

DistributionFisher distribution_fisher(const NetworkTopology& topo, const WeightVector& w,
                                       const Eigen::MatrixXd& inputs,
                                       const MetricSpec& metric = MetricSpec::squared_distance(),
                                       double rel_tol = 1e-8);

}  // namespace ddp
