#include "ddp/paths.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/SVD>

#include "ddp/oracles.hpp"

namespace ddp {

unsigned long long count_paths(const NetworkTopology& topo) {
  const unsigned long long cap = ~0ull / 2;
  std::vector<unsigned long long> np(topo.node_count(), 0);
  const std::vector<int>& order = topo.topo_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    if (topo.kind(v) == NodeKind::Output) {
      np[v] = 1;
      continue;
    }
    for (int e : topo.out_edges(v)) {
      unsigned long long add = np[topo.edges()[e].dst];
      np[v] = np[v] > cap - add ? cap : np[v] + add;
    }
  }
  unsigned long long total = 0;
  for (int v : topo.input_nodes()) total = total > cap - np[v] ? cap : total + np[v];
  if (topo.bias_node() >= 0) {
    unsigned long long add = np[topo.bias_node()];
    total = total > cap - add ? cap : total + add;
  }
  return total;
}

PathSet enumerate_paths(const NetworkTopology& topo, unsigned long long limit) {
  unsigned long long count = count_paths(topo);
  if (count > limit) throw PathLimitError(count, limit);

  PathSet ps;
  std::vector<int> stack;
  auto dfs = [&](auto&& self, int node, int head) -> void {
    if (topo.kind(node) == NodeKind::Output) {
      ps.edges.push_back(stack);
      ps.head.push_back(head);
      ps.tail.push_back(node);
      return;
    }
    for (int e : topo.out_edges(node)) {
      stack.push_back(e);
      self(self, topo.edges()[e].dst, head);
      stack.pop_back();
    }
  };
  for (int v : topo.input_nodes()) dfs(dfs, v, v);
  if (topo.bias_node() >= 0) dfs(dfs, topo.bias_node(), topo.bias_node());

  std::vector<int> perm(ps.edges.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(),
            [&](int a, int b) { return ps.edges[a] < ps.edges[b]; });
  PathSet sorted;
  for (int p : perm) {
    sorted.edges.push_back(std::move(ps.edges[p]));
    sorted.head.push_back(ps.head[p]);
    sorted.tail.push_back(ps.tail[p]);
  }
  return sorted;
}

Eigen::VectorXd path_features(const PathSet& paths, const NetworkTopology& topo,
                              const WeightVector& w, const Eigen::VectorXd& x) {
  ActivationRecord act = forward(topo, w, x.transpose());
  Eigen::VectorXd phi(paths.size());
  for (int p = 0; p < paths.size(); ++p) {
    double gate = 1.0;
    for (std::size_t k = 0; k + 1 < paths.edges[p].size(); ++k) {
      int v = topo.edges()[paths.edges[p][k]].dst;  // internal node on the path
      if (!(act.z(0, v) > 0.0)) {
        gate = 0.0;
        break;
      }
    }
    double head_val = 1.0;
    if (topo.kind(paths.head[p]) == NodeKind::Input) head_val = act.h(0, paths.head[p]);
    phi[p] = gate * head_val;
  }
  return phi;
}

PathJacobian path_jacobian(const PathSet& paths, const NetworkTopology& topo,
                           const WeightVector& w) {
  PathJacobian pj;
  pj.J = Eigen::MatrixXd::Zero(paths.size(), topo.edge_count());
  pj.M = Eigen::MatrixXd::Zero(paths.size(), topo.edge_count());
  pj.pi = Eigen::VectorXd::Ones(paths.size());
  for (int p = 0; p < paths.size(); ++p) {
    const std::vector<int>& es = paths.edges[p];
    const std::size_t len = es.size();
    std::vector<double> prefix(len + 1, 1.0), suffix(len + 1, 1.0);
    for (std::size_t k = 0; k < len; ++k) prefix[k + 1] = prefix[k] * w[es[k]];
    for (std::size_t k = len; k > 0; --k) suffix[k - 1] = suffix[k] * w[es[k - 1]];
    pj.pi[p] = prefix[len];
    for (std::size_t k = 0; k < len; ++k) {
      pj.M(p, es[k]) = 1.0;
      pj.J(p, es[k]) = prefix[k] * suffix[k + 1];
    }
  }
  return pj;
}

int numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  if (!m.allFinite()) throw Error("numerical_rank: non-finite matrix");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  return static_cast<int>((s.array() > rel_tol * s[0]).count());
}

int generic_rank_prediction(const NetworkTopology& topo) {
  return topo.edge_count() - topo.internal_count();
}

DegreesOfFreedom degrees_of_freedom(const NetworkTopology& topo, const WeightVector& w,
                                    const Eigen::MatrixXd& probe_inputs, double rel_tol) {
  const int n = static_cast<int>(probe_inputs.rows());
  Eigen::MatrixXd stacked(n * topo.output_count(), topo.edge_count());
  for (int i = 0; i < n; ++i)
    stacked.middleRows(i * topo.output_count(), topo.output_count()) =
        oracles::per_output_jacobian(topo, w, probe_inputs.row(i).transpose());
  DegreesOfFreedom d;
  d.d_G = numerical_rank(stacked, rel_tol);
  d.dim_N = topo.edge_count() - d.d_G;
  d.probe_count = n;
  d.enough_probes = n >= topo.edge_count();
  return d;
}

MetricSpec MetricSpec::squared_distance() {
  MetricSpec m;
  m.hessian = [](const Eigen::VectorXd& z) {
    return Eigen::MatrixXd(2.0 * Eigen::MatrixXd::Identity(z.size(), z.size()));
  };
  return m;
}

DistributionFisher distribution_fisher(const NetworkTopology& topo, const WeightVector& w,
                                       const Eigen::MatrixXd& inputs, const MetricSpec& metric,
                                       double rel_tol) {
  const int n = static_cast<int>(inputs.rows());
  if (n == 0) throw Error("empty batch");
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(topo.edge_count(), topo.edge_count());
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x = inputs.row(i).transpose();
    Eigen::MatrixXd J = oracles::per_output_jacobian(topo, w, x);
    Eigen::VectorXd f = network_outputs(topo, w, x.transpose()).row(0).transpose();
    F += J.transpose() * metric.hessian(f) * J;
  }
  DistributionFisher out;
  out.F = F / n;
  out.rank = numerical_rank(out.F, rel_tol);
  return out;
}

}  // namespace ddp
