#pragma once

#include <string>
#include <vector>

#include "ddp/error.hpp"

namespace ddp {

enum class NodeKind { Input, Bias, Internal, Output };

const char* to_string(NodeKind k);
NodeKind node_kind_from_string(const std::string& s);

struct NodeSpec {
  std::string id;
  NodeKind kind;
};

struct EdgeSpec {
  std::string src;
  std::string dst;
};

struct Edge {
  int src;
  int dst;
};

/// Immutable feedforward DAG. Edge order is canonical: sorted by
/// (topological index of dst, topological index of src), and is the indexing
/// authority for every weight/gradient/kappa vector in the library.
class NetworkTopology {
 public:
  // Returns the empty list when the graph satisfies every invariant,
  // otherwise one message per violation.
  static std::vector<std::string> validate(const std::vector<NodeSpec>& nodes,
                                           const std::vector<EdgeSpec>& edges);

  // Throws Error listing all violations.
  static NetworkTopology build(std::vector<NodeSpec> nodes, const std::vector<EdgeSpec>& edges);

  // Fully-connected layered net, e.g. {2,3,1}. With `with_bias`, one bias node
  // feeds every internal and output node.
  static NetworkTopology layered(const std::vector<int>& widths, bool with_bias = false);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  NodeKind kind(int node) const { return nodes_[node].kind; }
  const std::string& name(int node) const { return nodes_[node].id; }
  int node_index(const std::string& id) const;  // -1 if unknown

  const std::vector<int>& topo_order() const { return topo_order_; }
  int topo_index(int node) const { return topo_index_[node]; }

  const std::vector<int>& in_edges(int node) const { return in_edges_[node]; }
  const std::vector<int>& out_edges(int node) const { return out_edges_[node]; }

  const std::vector<int>& input_nodes() const { return inputs_; }
  const std::vector<int>& output_nodes() const { return outputs_; }
  const std::vector<int>& internal_nodes() const { return internals_; }
  int bias_node() const { return bias_; }  // -1 when absent
  int input_count() const { return static_cast<int>(inputs_.size()); }
  int output_count() const { return static_cast<int>(outputs_.size()); }
  int internal_count() const { return static_cast<int>(internals_.size()); }

  const std::vector<NodeSpec>& nodes() const { return nodes_; }

 private:
  NetworkTopology() = default;

  std::vector<NodeSpec> nodes_;
  std::vector<Edge> edges_;
  std::vector<int> topo_order_, topo_index_;
  std::vector<std::vector<int>> in_edges_, out_edges_;
  std::vector<int> inputs_, outputs_, internals_;
  int bias_ = -1;
};

}  // namespace ddp
