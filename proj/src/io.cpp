#include "ddp/io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ddp {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("parse error: ") + e.what());
  }
}

void save_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

NetworkTopology load_topology(const std::string& path) {
  json j = load_json(path);
  if (!j.contains("nodes") || !j.contains("edges"))
    throw ConfigError(path, "topology document needs 'nodes' and 'edges'");
  std::vector<NodeSpec> nodes;
  for (const json& n : j.at("nodes"))
    nodes.push_back({n.at("id").get<std::string>(),
                     node_kind_from_string(n.at("kind").get<std::string>())});
  std::vector<EdgeSpec> edges;
  for (const json& e : j.at("edges"))
    edges.push_back({e.at("src").get<std::string>(), e.at("dst").get<std::string>()});
  return NetworkTopology::build(std::move(nodes), edges);
}

void save_topology(const NetworkTopology& topo, const std::string& path) {
  json nodes = json::array();
  for (const NodeSpec& n : topo.nodes()) nodes.push_back({{"id", n.id}, {"kind", to_string(n.kind)}});
  json edges = json::array();
  for (const Edge& e : topo.edges())
    edges.push_back({{"src", topo.name(e.src)}, {"dst", topo.name(e.dst)}});
  save_json({{"nodes", nodes}, {"edges", edges}}, path);
}

WeightVector load_weights(const std::string& path, const NetworkTopology& topo) {
  json j = load_json(path);
  if (!j.is_array()) throw ConfigError(path, "weights document must be a flat array");
  if (static_cast<int>(j.size()) != topo.edge_count())
    throw ConfigError(path, "expected " + std::to_string(topo.edge_count()) + " weights, got " +
                                std::to_string(j.size()));
  WeightVector w(topo.edge_count());
  for (int e = 0; e < topo.edge_count(); ++e) w[e] = j[e].get<double>();
  if (!w.allFinite()) throw ConfigError(path, "non-finite weight");
  return w;
}

void save_weights(const WeightVector& w, const std::string& path) {
  json j = json::array();
  for (int e = 0; e < w.size(); ++e) j.push_back(w[e]);
  save_json(j, path);
}

std::string fnv1a_hex(const std::string& data) {
  unsigned long long h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace ddp
