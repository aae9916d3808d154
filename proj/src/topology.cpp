#include "ddp/topology.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace ddp {

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Input: return "input";
    case NodeKind::Bias: return "bias";
    case NodeKind::Internal: return "internal";
    case NodeKind::Output: return "output";
  }
  return "?";
}

NodeKind node_kind_from_string(const std::string& s) {
  if (s == "input") return NodeKind::Input;
  if (s == "bias") return NodeKind::Bias;
  if (s == "internal") return NodeKind::Internal;
  if (s == "output") return NodeKind::Output;
  throw ConfigError("kind", "unknown node kind '" + s + "'");
}

namespace {

// Kahn's algorithm, breaking ties by declaration order. Returns empty when a
// cycle exists.
std::vector<int> topo_sort(int n, const std::vector<Edge>& edges) {
  std::vector<int> indeg(n, 0);
  std::vector<std::vector<int>> adj(n);
  for (const Edge& e : edges) {
    indeg[e.dst]++;
    adj[e.src].push_back(e.dst);
  }
  std::set<int> ready;
  for (int v = 0; v < n; ++v)
    if (indeg[v] == 0) ready.insert(v);
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    int v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (int u : adj[v])
      if (--indeg[u] == 0) ready.insert(u);
  }
  if (static_cast<int>(order.size()) != n) order.clear();
  return order;
}

}  // namespace

std::vector<std::string> NetworkTopology::validate(const std::vector<NodeSpec>& nodes,
                                                   const std::vector<EdgeSpec>& edges) {
  std::vector<std::string> problems;
  std::map<std::string, int> index;
  int bias_count = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!index.emplace(nodes[i].id, static_cast<int>(i)).second)
      problems.push_back("duplicate node id '" + nodes[i].id + "'");
    if (nodes[i].kind == NodeKind::Bias) bias_count++;
  }
  if (bias_count > 1) problems.push_back("more than one bias node");

  std::vector<Edge> resolved;
  std::set<std::pair<int, int>> seen;
  std::vector<int> indeg(nodes.size(), 0), outdeg(nodes.size(), 0);
  for (const EdgeSpec& e : edges) {
    auto s = index.find(e.src), d = index.find(e.dst);
    if (s == index.end()) problems.push_back("edge references unknown node '" + e.src + "'");
    if (d == index.end()) problems.push_back("edge references unknown node '" + e.dst + "'");
    if (s == index.end() || d == index.end()) continue;
    if (s->second == d->second)
      problems.push_back("self-loop on node '" + e.src + "'");
    if (!seen.emplace(s->second, d->second).second)
      problems.push_back("duplicate edge " + e.src + "->" + e.dst);
    resolved.push_back({s->second, d->second});
    outdeg[s->second]++;
    indeg[d->second]++;
  }

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const NodeSpec& nd = nodes[i];
    switch (nd.kind) {
      case NodeKind::Input:
      case NodeKind::Bias:
        if (indeg[i] > 0) problems.push_back("node '" + nd.id + "' must not have incoming edges");
        break;
      case NodeKind::Output:
        if (outdeg[i] > 0) problems.push_back("output '" + nd.id + "' must not have outgoing edges");
        break;
      case NodeKind::Internal:
        if (indeg[i] == 0) problems.push_back("internal node '" + nd.id + "' has empty fan-in");
        if (outdeg[i] == 0) problems.push_back("internal node '" + nd.id + "' has empty fan-out");
        break;
    }
    if (indeg[i] == 0 && outdeg[i] == 0 && nd.kind != NodeKind::Internal)
      problems.push_back("dangling node '" + nd.id + "'");
  }

  if (topo_sort(static_cast<int>(nodes.size()), resolved).empty() && !nodes.empty())
    problems.push_back("graph contains a cycle");
  return problems;
}

NetworkTopology NetworkTopology::build(std::vector<NodeSpec> nodes,
                                       const std::vector<EdgeSpec>& edges) {
  std::vector<std::string> problems = validate(nodes, edges);
  if (!problems.empty()) {
    std::string msg = "invalid topology:";
    for (const std::string& p : problems) msg += "\n  - " + p;
    throw Error(msg);
  }

  NetworkTopology t;
  t.nodes_ = std::move(nodes);
  std::map<std::string, int> index;
  for (int i = 0; i < t.node_count(); ++i) index[t.nodes_[i].id] = i;
  for (const EdgeSpec& e : edges) t.edges_.push_back({index[e.src], index[e.dst]});

  t.topo_order_ = topo_sort(t.node_count(), t.edges_);
  t.topo_index_.resize(t.node_count());
  for (int i = 0; i < t.node_count(); ++i) t.topo_index_[t.topo_order_[i]] = i;

  // canonical edge order
  std::sort(t.edges_.begin(), t.edges_.end(), [&](const Edge& a, const Edge& b) {
    if (t.topo_index_[a.dst] != t.topo_index_[b.dst])
      return t.topo_index_[a.dst] < t.topo_index_[b.dst];
    return t.topo_index_[a.src] < t.topo_index_[b.src];
  });

  t.in_edges_.resize(t.node_count());
  t.out_edges_.resize(t.node_count());
  for (int e = 0; e < t.edge_count(); ++e) {
    t.in_edges_[t.edges_[e].dst].push_back(e);
    t.out_edges_[t.edges_[e].src].push_back(e);
  }
  for (int v = 0; v < t.node_count(); ++v) {
    switch (t.nodes_[v].kind) {
      case NodeKind::Input: t.inputs_.push_back(v); break;
      case NodeKind::Output: t.outputs_.push_back(v); break;
      case NodeKind::Internal: t.internals_.push_back(v); break;
      case NodeKind::Bias: t.bias_ = v; break;
    }
  }
  return t;
}

NetworkTopology NetworkTopology::layered(const std::vector<int>& widths, bool with_bias) {
  if (widths.size() < 2) throw Error("layered topology needs at least two layers");
  std::vector<NodeSpec> nodes;
  std::vector<std::vector<std::string>> layers(widths.size());
  for (std::size_t l = 0; l < widths.size(); ++l) {
    for (int i = 0; i < widths[l]; ++i) {
      std::string id;
      NodeKind kind;
      if (l == 0) {
        id = "x" + std::to_string(i);
        kind = NodeKind::Input;
      } else if (l + 1 == widths.size()) {
        id = "y" + std::to_string(i);
        kind = NodeKind::Output;
      } else {
        id = "h" + std::to_string(l) + "_" + std::to_string(i);
        kind = NodeKind::Internal;
      }
      layers[l].push_back(id);
      nodes.push_back({id, kind});
    }
  }
  std::vector<EdgeSpec> edges;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l)
    for (const std::string& s : layers[l])
      for (const std::string& d : layers[l + 1]) edges.push_back({s, d});
  if (with_bias) {
    nodes.push_back({"b", NodeKind::Bias});
    for (std::size_t l = 1; l < widths.size(); ++l)
      for (const std::string& d : layers[l]) edges.push_back({"b", d});
  }
  return build(std::move(nodes), edges);
}

int NetworkTopology::node_index(const std::string& id) const {
  for (int i = 0; i < node_count(); ++i)
    if (nodes_[i].id == id) return i;
  return -1;
}

}  // namespace ddp
