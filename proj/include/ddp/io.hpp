#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "ddp/netgraph.hpp"

namespace ddp {

// Topology document: {"nodes":[{"id","kind"}...], "edges":[{"src","dst"}...]}.
// Edge order is canonicalized on load.
NetworkTopology load_topology(const std::string& path);
void save_topology(const NetworkTopology& topo, const std::string& path);

// Weights document: flat JSON array, |E| numbers in canonical edge order.
WeightVector load_weights(const std::string& path, const NetworkTopology& topo);
void save_weights(const WeightVector& w, const std::string& path);

nlohmann::json load_json(const std::string& path);
void save_json(const nlohmann::json& j, const std::string& path);

// FNV-1a over the canonical dump, for checkpoint config hashes
std::string fnv1a_hex(const std::string& data);

}  // namespace ddp
