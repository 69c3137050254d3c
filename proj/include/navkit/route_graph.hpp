#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "navkit/errors.hpp"
#include "navkit/rng.hpp"

namespace navkit::route_graph {

using NodeId = std::string;
using EdgeId = std::string;

/// Marker used as the outgoing edge of a triplet that ends at an exit node.
inline const EdgeId kTerminalMarker = "-";

struct Edge {
  NodeId a;
  NodeId b;
  EdgeId id;
  std::int64_t weight_frames = 0;

  NodeId other(const NodeId& node) const { return node == a ? b : a; }
  bool incident(const NodeId& node) const { return node == a || node == b; }
};

/// Corridor graph: intersections and exits are nodes, corridors are
/// undirected edges weighted by their video length in frames. Immutable
/// after construction; queries are read-only.
class TopologicalMap {
 public:
  void add_node(const NodeId& id) {
    if (id.empty()) throw InvariantViolation("empty node id");
    if (!nodes_.insert(id).second) {
      throw InvariantViolation("duplicate node id: " + id);
    }
  }

  void add_edge(const NodeId& a, const NodeId& b, const EdgeId& id,
                std::int64_t weight_frames) {
    if (!has_node(a)) throw InvariantViolation("edge endpoint unknown: " + a);
    if (!has_node(b)) throw InvariantViolation("edge endpoint unknown: " + b);
    if (a == b) throw InvariantViolation("self-loop at node " + a);
    if (weight_frames <= 0) {
      throw InvariantViolation("edge weight must be positive: " + id);
    }
    if (id.empty() || id == kTerminalMarker) {
      throw InvariantViolation("invalid edge id: '" + id + "'");
    }
    if (edges_.contains(id)) {
      throw InvariantViolation("duplicate edge id: " + id);
    }
    edges_.emplace(id, Edge{a, b, id, weight_frames});
    incident_[a].insert(id);
    incident_[b].insert(id);
  }

  bool has_node(const NodeId& id) const { return nodes_.contains(id); }
  bool has_edge(const EdgeId& id) const { return edges_.contains(id); }

  const Edge& edge(const EdgeId& id) const {
    auto it = edges_.find(id);
    if (it == edges_.end()) throw InvariantViolation("unknown edge: " + id);
    return it->second;
  }

  const std::set<NodeId>& nodes() const { return nodes_; }
  const std::map<EdgeId, Edge>& edges() const { return edges_; }

  /// Edge ids incident to `node`, in sorted order.
  const std::set<EdgeId>& incident(const NodeId& node) const {
    static const std::set<EdgeId> empty;
    auto it = incident_.find(node);
    return it == incident_.end() ? empty : it->second;
  }

 private:
  std::set<NodeId> nodes_;
  std::map<EdgeId, Edge> edges_;
  std::map<NodeId, std::set<EdgeId>> incident_;
};

/// Half-open frame range inside a recorded video, optionally played backward.
struct SegmentRef {
  std::string video_id;
  std::int64_t frame_start = 0;
  std::int64_t frame_end = 0;
  bool reversed = false;

  std::int64_t frame_count() const { return frame_end - frame_start; }

  void validate() const {
    if (frame_start < 0 || frame_start >= frame_end) {
      throw InvariantViolation("segment frame range invalid: [" +
                               std::to_string(frame_start) + ", " +
                               std::to_string(frame_end) + ")");
    }
  }

  bool operator==(const SegmentRef&) const = default;
};

/// A video segment keyed by (incoming corridor, intersection, outgoing
/// corridor). The outgoing edge is the terminal marker for segments that
/// arrive at an exit.
struct TripletAnnotation {
  EdgeId incoming_edge;
  NodeId through_node;
  EdgeId outgoing_edge;
  SegmentRef segment;

  bool terminal() const { return outgoing_edge == kTerminalMarker; }
  bool operator==(const TripletAnnotation&) const = default;
};

struct TripletKey {
  EdgeId incoming;
  NodeId node;
  EdgeId outgoing;

  auto operator<=>(const TripletKey&) const = default;

  std::string to_string() const {
    return "(" + incoming + ", " + node + ", " + outgoing + ")";
  }
};

inline TripletKey key_of(const TripletAnnotation& annotation) {
  return {annotation.incoming_edge, annotation.through_node,
          annotation.outgoing_edge};
}

inline void validate_annotation(const TopologicalMap& map,
                                const TripletAnnotation& annotation) {
  annotation.segment.validate();
  if (!map.has_node(annotation.through_node)) {
    throw InvariantViolation("triplet through unknown node: " +
                             annotation.through_node);
  }
  const auto& incident = map.incident(annotation.through_node);
  if (!incident.contains(annotation.incoming_edge)) {
    throw InvariantViolation("triplet incoming edge " +
                             annotation.incoming_edge + " not incident to " +
                             annotation.through_node);
  }
  if (!annotation.terminal() && !incident.contains(annotation.outgoing_edge)) {
    throw InvariantViolation("triplet outgoing edge " +
                             annotation.outgoing_edge + " not incident to " +
                             annotation.through_node);
  }
}

/// A weighted path; nodes.size() == edges.size() + 1.
struct GraphPath {
  std::vector<NodeId> nodes;
  std::vector<EdgeId> edges;
  std::int64_t total_weight = 0;
};

/// A recombined navigation path: the ordered triplet segments realizing a
/// walk from start_node to goal_node. Consecutive triplets chain (the
/// outgoing edge of one is the incoming edge of the next).
struct SyntheticPath {
  NodeId start_node;
  NodeId goal_node;
  std::vector<TripletAnnotation> triplets;
};

/// Minimum-total-frames path between two nodes. Among equal-weight paths the
/// one with the lexicographically smallest node-id sequence is returned, so
/// results are reproducible.
inline GraphPath shortest_path(const TopologicalMap& map, const NodeId& start,
                               const NodeId& goal) {
  if (!map.has_node(start)) throw UnknownNode("unknown start node: " + start);
  if (!map.has_node(goal)) throw UnknownNode("unknown goal node: " + goal);

  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();
  std::map<NodeId, std::int64_t> dist_to_goal;
  for (const NodeId& node : map.nodes()) dist_to_goal[node] = kInf;
  dist_to_goal[goal] = 0;

  using QueueItem = std::pair<std::int64_t, NodeId>;
  std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> queue;
  queue.emplace(0, goal);
  while (!queue.empty()) {
    const auto [d, node] = queue.top();
    queue.pop();
    if (d > dist_to_goal[node]) continue;
    for (const EdgeId& edge_id : map.incident(node)) {
      const Edge& edge = map.edge(edge_id);
      const NodeId next = edge.other(node);
      const std::int64_t candidate = d + edge.weight_frames;
      if (candidate < dist_to_goal[next]) {
        dist_to_goal[next] = candidate;
        queue.emplace(candidate, next);
      }
    }
  }

  if (dist_to_goal[start] == kInf) {
    throw NoPath("no path from " + start + " to " + goal);
  }

  // Walk from the start, always stepping onto a shortest continuation; the
  // incident sets are sorted so the smallest eligible node id (then edge id)
  // wins and the node sequence is lexicographically minimal.
  GraphPath path;
  path.total_weight = dist_to_goal[start];
  path.nodes.push_back(start);
  NodeId current = start;
  while (current != goal) {
    const Edge* best_edge = nullptr;
    NodeId best_next;
    for (const EdgeId& edge_id : map.incident(current)) {
      const Edge& edge = map.edge(edge_id);
      const NodeId next = edge.other(current);
      if (dist_to_goal[next] == kInf ||
          edge.weight_frames + dist_to_goal[next] != dist_to_goal[current]) {
        continue;
      }
      if (best_edge == nullptr || next < best_next ||
          (next == best_next && edge.id < best_edge->id)) {
        best_edge = &edge;
        best_next = next;
      }
    }
    path.edges.push_back(best_edge->id);
    path.nodes.push_back(best_next);
    current = best_next;
  }
  return path;
}

namespace detail {

class TripletIndex {
 public:
  explicit TripletIndex(std::span<const TripletAnnotation> annotations) {
    for (const TripletAnnotation& annotation : annotations) {
      index_.try_emplace(key_of(annotation), &annotation);  // first one wins
    }
  }

  const TripletAnnotation* find(const TripletKey& key) const {
    auto it = index_.find(key);
    return it == index_.end() ? nullptr : it->second;
  }

 private:
  std::map<TripletKey, const TripletAnnotation*> index_;
};

}  // namespace detail

/// Deterministic core of path generation: the shortest walk between two given
/// nodes, realized as its annotated triplet segments. A triplet without an
/// annotation is an error, never silently skipped.
inline SyntheticPath generate_path_between(
    const TopologicalMap& map, std::span<const TripletAnnotation> annotations,
    const NodeId& start, const NodeId& goal) {
  const GraphPath walk = shortest_path(map, start, goal);
  const detail::TripletIndex index(annotations);

  SyntheticPath path;
  path.start_node = start;
  path.goal_node = goal;
  for (std::size_t i = 1; i + 1 < walk.nodes.size(); ++i) {
    const TripletKey key{walk.edges[i - 1], walk.nodes[i], walk.edges[i]};
    const TripletAnnotation* annotation = index.find(key);
    if (annotation == nullptr) {
      throw MissingTriplet("no annotation for triplet " + key.to_string());
    }
    path.triplets.push_back(*annotation);
  }
  return path;
}

/// Samples a start and goal uniformly (resampling until they differ and are
/// connected) and recombines the annotated segments along the shortest path.
/// Deterministic for a fixed seed.
inline SyntheticPath generate_path(const TopologicalMap& map,
                                   std::span<const TripletAnnotation> annotations,
                                   std::uint64_t rng_seed) {
  if (map.nodes().size() < 2) {
    throw GraphTooSmall("need at least 2 nodes, got " +
                        std::to_string(map.nodes().size()));
  }
  if (map.edges().empty()) {
    throw NoPath("map has no edges, no start/goal pair is connected");
  }
  std::vector<NodeId> nodes(map.nodes().begin(), map.nodes().end());
  Rng rng(rng_seed);
  for (;;) {
    const NodeId& start = nodes[rng.uniform_index(nodes.size())];
    const NodeId& goal = nodes[rng.uniform_index(nodes.size())];
    if (start == goal) continue;
    try {
      return generate_path_between(map, annotations, start, goal);
    } catch (const NoPath&) {
      continue;  // disconnected pair, draw again
    }
  }
}

/// Every ordered (incoming edge, node, outgoing edge) triple the map demands
/// that has no annotation. An empty result means any generated path can be
/// realized.
inline std::vector<TripletKey> validate_coverage(
    const TopologicalMap& map, std::span<const TripletAnnotation> annotations) {
  const detail::TripletIndex index(annotations);
  std::vector<TripletKey> missing;
  for (const NodeId& node : map.nodes()) {
    const auto& incident = map.incident(node);
    for (const EdgeId& in : incident) {
      for (const EdgeId& out : incident) {
        if (in == out) continue;
        const TripletKey key{in, node, out};
        if (index.find(key) == nullptr) {
          missing.push_back(key);
        }
      }
    }
  }
  return missing;
}

/// The same segment walked in the opposite direction: incoming and outgoing
/// edges swap and the footage plays backward. An involution.
inline TripletAnnotation reverse_segment(const TripletAnnotation& annotation) {
  TripletAnnotation reversed = annotation;
  std::swap(reversed.incoming_edge, reversed.outgoing_edge);
  reversed.segment.reversed = !reversed.segment.reversed;
  return reversed;
}

/// Checks the chaining invariants of a generated path; throws
/// InvariantViolation when they do not hold.
inline void validate_chaining(const TopologicalMap& map,
                              const SyntheticPath& path) {
  if (path.start_node == path.goal_node) {
    throw InvariantViolation("path start equals goal");
  }
  for (const TripletAnnotation& triplet : path.triplets) {
    validate_annotation(map, triplet);
    if (triplet.terminal()) {
      throw InvariantViolation("terminal triplet inside a path");
    }
  }
  for (std::size_t i = 0; i + 1 < path.triplets.size(); ++i) {
    if (path.triplets[i].outgoing_edge != path.triplets[i + 1].incoming_edge) {
      throw InvariantViolation("triplets do not chain at position " +
                               std::to_string(i));
    }
  }
  if (!path.triplets.empty()) {
    if (!map.edge(path.triplets.front().incoming_edge)
             .incident(path.start_node)) {
      throw InvariantViolation("first edge not incident to the start node");
    }
    if (!map.edge(path.triplets.back().outgoing_edge)
             .incident(path.goal_node)) {
      throw InvariantViolation("last edge not incident to the goal node");
    }
  }
}

}  // namespace navkit::route_graph
