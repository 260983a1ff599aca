#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace qgnls {

/// Edge as written in a graph description file. `cells` <= 0 means "let the
/// discretization decide".
struct EdgeSpec {
  std::string from;
  std::string to;
  double length = 0.0;
  int cells = 0;
};

struct GraphSpec {
  std::vector<std::string> vertices;
  std::vector<EdgeSpec> edges;
};

struct Edge {
  std::size_t tail = 0;
  std::size_t head = 0;
  double length = 0.0;
  int cells = 0;  // requested cell count, 0 if unspecified

  bool is_loop() const { return tail == head; }
};

/// Compact metric graph: finitely many edges of finite positive length,
/// connected. Immutable once built.
class MetricGraph {
 public:
  const std::vector<std::string>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  double total_length() const { return total_length_; }
  std::size_t degree(std::size_t v) const;

  /// Canonical JSON description (vertices in declaration order).
  nlohmann::json to_json() const;

 private:
  friend MetricGraph build_graph(const GraphSpec& spec);

  std::vector<std::string> vertices_;
  std::vector<Edge> edges_;
  double total_length_ = 0.0;
};

MetricGraph build_graph(const GraphSpec& spec);

GraphSpec parse_graph_spec(const nlohmann::json& j);
MetricGraph graph_from_json(const nlohmann::json& j);
MetricGraph load_graph(const std::filesystem::path& path);

// Small library of standard graphs used by tests, benchmarks and the CLI.
MetricGraph interval_graph(double length, int cells = 0);
MetricGraph star_graph(int arms, double arm_length, int cells = 0);
MetricGraph loop_graph(double length, int cells = 0);
MetricGraph tadpole_graph(double loop_length, double tail_length, int cells = 0);

/// 64-bit FNV-1a over the canonical JSON text of the graph.
std::uint64_t graph_hash(const MetricGraph& g);

}  // namespace qgnls
