#include "qgnls/graph.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "qgnls/error.hpp"
#include "qgnls/serialize.hpp"

namespace qgnls {

std::size_t MetricGraph::degree(std::size_t v) const {
  std::size_t d = 0;
  for (const auto& e : edges_) {
    d += (e.tail == v) + (e.head == v);
  }
  return d;
}

nlohmann::json MetricGraph::to_json() const {
  nlohmann::json j;
  j["vertices"] = vertices_;
  auto& es = j["edges"] = nlohmann::json::array();
  for (const auto& e : edges_) {
    nlohmann::json je{{"from", vertices_[e.tail]}, {"to", vertices_[e.head]}, {"length", e.length}};
    if (e.cells > 0) je["cells"] = e.cells;
    es.push_back(std::move(je));
  }
  return j;
}

namespace {

std::string edge_label(const EdgeSpec& e, std::size_t i) {
  return "#" + std::to_string(i) + " (" + e.from + " -> " + e.to + ")";
}

}  // namespace

MetricGraph build_graph(const GraphSpec& spec) {
  if (spec.edges.empty()) throw EmptyGraph();

  MetricGraph g;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& name : spec.vertices) {
    if (index.contains(name)) throw InvalidArgument("duplicate vertex '" + name + "'");
    index.emplace(name, g.vertices_.size());
    g.vertices_.push_back(name);
  }

  for (std::size_t i = 0; i < spec.edges.size(); ++i) {
    const auto& es = spec.edges[i];
    if (!(std::isfinite(es.length) && es.length > 0.0)) throw NonPositiveLength(edge_label(es, i));
    auto t = index.find(es.from);
    if (t == index.end()) throw UnknownVertex(es.from);
    auto h = index.find(es.to);
    if (h == index.end()) throw UnknownVertex(es.to);
    g.edges_.push_back({t->second, h->second, es.length, std::max(0, es.cells)});
  }

  // Union-find connectivity; every declared vertex must be reached.
  std::vector<std::size_t> parent(g.vertices_.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : g.edges_) parent[find(e.tail)] = find(e.head);
  const auto root = find(0);
  for (std::size_t v = 1; v < g.vertices_.size(); ++v) {
    if (find(v) != root) throw DisconnectedGraph(g.vertices_[v]);
  }

  // Summed in declaration order so the value is reproducible bit for bit.
  g.total_length_ = 0.0;
  for (const auto& e : g.edges_) g.total_length_ += e.length;
  return g;
}

GraphSpec parse_graph_spec(const nlohmann::json& j) {
  GraphSpec spec;
  try {
    spec.vertices = j.at("vertices").get<std::vector<std::string>>();
    for (const auto& je : j.at("edges")) {
      EdgeSpec e;
      e.from = je.at("from").get<std::string>();
      e.to = je.at("to").get<std::string>();
      e.length = je.at("length").get<double>();
      if (je.contains("cells")) e.cells = je.at("cells").get<int>();
      spec.edges.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidArgument(std::string("malformed graph description: ") + ex.what());
  }
  return spec;
}

MetricGraph graph_from_json(const nlohmann::json& j) { return build_graph(parse_graph_spec(j)); }

MetricGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open graph file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidArgument("graph file '" + path.string() + "' is not valid JSON: " + ex.what());
  }
  return graph_from_json(j);
}

MetricGraph interval_graph(double length, int cells) {
  return build_graph({{"a", "b"}, {{"a", "b", length, cells}}});
}

MetricGraph star_graph(int arms, double arm_length, int cells) {
  GraphSpec s;
  s.vertices.push_back("hub");
  for (int i = 0; i < arms; ++i) {
    const auto leaf = "leaf" + std::to_string(i);
    s.vertices.push_back(leaf);
    s.edges.push_back({"hub", leaf, arm_length, cells});
  }
  return build_graph(s);
}

MetricGraph loop_graph(double length, int cells) {
  return build_graph({{"v"}, {{"v", "v", length, cells}}});
}

MetricGraph tadpole_graph(double loop_length, double tail_length, int cells) {
  return build_graph({{"v", "end"}, {{"v", "v", loop_length, cells}, {"v", "end", tail_length, cells}}});
}

std::uint64_t graph_hash(const MetricGraph& g) { return fnv1a64(g.to_json().dump()); }

}  // namespace qgnls
