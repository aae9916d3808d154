#include "ddp/oracles.hpp"

#include <cmath>
#include <limits>

namespace ddp {
namespace oracles {

namespace {
const double kEps = std::numeric_limits<double>::epsilon();
}

double kink_clearance(const NetworkTopology& topo, const WeightVector& w,
                      const Eigen::MatrixXd& inputs) {
  ActivationRecord act = forward(topo, w, inputs);
  double clearance = std::numeric_limits<double>::infinity();
  for (int v : topo.internal_nodes())
    for (int i = 0; i < act.size(); ++i) {
      // exact zeros come from all-dead fan-ins; the node is locally constant
      // there, so it is not a kink
      double z = act.z(i, v);
      if (z != 0.0) clearance = std::min(clearance, std::abs(z));
    }
  return clearance;
}

WeightVector finite_difference_gradient(const ScalarFn& f, const WeightVector& w,
                                        const FiniteDiffSpec& spec) {
  spec.check();
  WeightVector g(w.size());
  WeightVector wp = w;
  for (int e = 0; e < w.size(); ++e) {
    double h = spec.step > 0.0 ? spec.step : std::cbrt(kEps) * std::max(1.0, std::abs(w[e]));
    wp[e] = w[e] + h;
    double fp = f(wp);
    wp[e] = w[e] - h;
    double fm = f(wp);
    wp[e] = w[e];
    g[e] = (fp - fm) / (2.0 * h);
  }
  return g;
}

WeightVector half_second_difference(const ScalarFn& f, const WeightVector& w,
                                    const FiniteDiffSpec& spec) {
  spec.check();
  const double f0 = f(w);
  WeightVector g(w.size());
  WeightVector wp = w;
  for (int e = 0; e < w.size(); ++e) {
    double h = spec.step > 0.0
                   ? spec.step
                   : std::pow(kEps, 0.25) * std::max(1.0, std::abs(w[e]));
    wp[e] = w[e] + h;
    double fp = f(wp);
    wp[e] = w[e] - h;
    double fm = f(wp);
    wp[e] = w[e];
    g[e] = 0.5 * (fp - 2.0 * f0 + fm) / (h * h);
  }
  return g;
}

Eigen::MatrixXd per_output_jacobian(const NetworkTopology& topo, const WeightVector& w,
                                    const Eigen::VectorXd& x) {
  ActivationRecord act = forward(topo, w, x.transpose());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(topo.output_count(), topo.edge_count());
  const std::vector<int>& order = topo.topo_order();
  int row = 0;
  for (int vout : topo.output_nodes()) {
    Eigen::VectorXd dz = Eigen::VectorXd::Zero(topo.node_count());
    dz[vout] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      int v = *it;
      NodeKind k = topo.kind(v);
      if (k == NodeKind::Input || k == NodeKind::Bias) continue;
      if (k == NodeKind::Internal && act.z(0, v) <= 0.0) dz[v] = 0.0;
      for (int e : topo.in_edges(v)) {
        int u = topo.edges()[e].src;
        J(row, e) = dz[v] * act.h(0, u);
        dz[u] += w[e] * dz[v];
      }
    }
    ++row;
  }
  return J;
}

WeightVector diagonal_fisher_gaussian(const NetworkTopology& topo, const WeightVector& w,
                                      const Eigen::MatrixXd& inputs) {
  const int n = static_cast<int>(inputs.rows());
  if (n == 0) throw Error("empty batch");
  WeightVector F = WeightVector::Zero(topo.edge_count());
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd J = per_output_jacobian(topo, w, inputs.row(i).transpose());
    F += J.array().square().colwise().sum().matrix().transpose();
  }
  return F / n;
}

namespace {

// DFS over all source->output paths; calls visit(path edge list) per path.
template <typename Visit>
void walk_paths(const NetworkTopology& topo, unsigned long long limit, const Visit& visit) {
  unsigned long long count = 0;
  std::vector<int> stack;
  auto dfs = [&](auto&& self, int node) -> void {
    if (topo.kind(node) == NodeKind::Output) {
      if (++count > limit) throw PathLimitError(count, limit);
      visit(stack);
      return;
    }
    for (int e : topo.out_edges(node)) {
      stack.push_back(e);
      self(self, topo.edges()[e].dst);
      stack.pop_back();
    }
  };
  for (int v : topo.input_nodes()) dfs(dfs, v);
  if (topo.bias_node() >= 0) dfs(dfs, topo.bias_node());
}

}  // namespace

double brute_force_path_kappa(const NetworkTopology& topo, const WeightVector& w, int edge,
                              unsigned long long path_limit) {
  double total = 0.0;
  walk_paths(topo, path_limit, [&](const std::vector<int>& path) {
    bool through = false;
    double prod = 1.0;
    for (int e : path) {
      if (e == edge) {
        through = true;
        continue;
      }
      prod *= w[e] * w[e];
    }
    if (through) total += prod;
  });
  return total;
}

double brute_force_path_regularizer(const NetworkTopology& topo, const WeightVector& w,
                                    double input_gamma_sq, unsigned long long path_limit) {
  double total = 0.0;
  walk_paths(topo, path_limit, [&](const std::vector<int>& path) {
    double prod = input_gamma_sq;
    for (int e : path) prod *= w[e] * w[e];
    total += prod;
  });
  return total;
}

}  // namespace oracles
}  // namespace ddp
