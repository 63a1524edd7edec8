#include "lvlingam/graph.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <deque>
#include <fstream>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "lvlingam/errors.hpp"

namespace lvlingam {

namespace {

std::vector<NodeId> kahn_order(std::size_t n, const std::vector<NodeSet>& parents,
                               const std::vector<NodeSet>& children) {
  std::vector<std::size_t> indegree(n);
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (NodeId v = 0; v < n; ++v) {
    indegree[v] = parents[v].size();
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<NodeId> order;
  order.reserve(n);
  while (!ready.empty()) {
    const NodeId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (NodeId c : children[v]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  return order;
}

}  // namespace

Dag::Dag(std::size_t node_count, std::vector<Edge> edges, std::vector<NodeId> observed,
         std::vector<NodeId> latent, std::vector<std::string> names)
    : node_count_(node_count),
      observed_(std::move(observed)),
      latent_(std::move(latent)),
      names_(std::move(names)),
      parents_(node_count),
      children_(node_count),
      column_(node_count, 0),
      row_(node_count) {
  if (node_count_ == 0) throw Error(ErrorCode::kInput, "graph must have at least one node");

  std::vector<int> seen(node_count_, 0);
  for (NodeId v : observed_) {
    if (v >= node_count_) throw Error(ErrorCode::kInput, "observed node id out of range");
    ++seen[v];
  }
  for (NodeId v : latent_) {
    if (v >= node_count_) throw Error(ErrorCode::kInput, "latent node id out of range");
    ++seen[v];
  }
  for (NodeId v = 0; v < node_count_; ++v) {
    if (seen[v] != 1) {
      throw Error(ErrorCode::kInput,
                  "observed and latent lists must partition the nodes (node " +
                      std::to_string(v) + ")");
    }
  }

  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (const Edge& e : edges) {
    if (e.from >= node_count_ || e.to >= node_count_) {
      throw Error(ErrorCode::kInput, "edge endpoint out of range");
    }
    if (e.from == e.to) throw Error(ErrorCode::kInput, "self loop on node " + std::to_string(e.from));
    parents_[e.to].insert(e.from);
    children_[e.from].insert(e.to);
  }
  edges_ = std::move(edges);

  topo_ = kahn_order(node_count_, parents_, children_);
  if (topo_.size() != node_count_) throw Error(ErrorCode::kInput, "graph has a directed cycle");

  std::size_t col = 0;
  for (std::size_t r = 0; r < observed_.size(); ++r) {
    row_[observed_[r]] = r;
    column_[observed_[r]] = col++;
  }
  for (NodeId v : latent_) column_[v] = col++;

  if (names_.empty()) {
    for (NodeId v = 0; v < node_count_; ++v) names_.push_back("V" + std::to_string(v));
  } else if (names_.size() != node_count_) {
    throw Error(ErrorCode::kInput, "names must have one entry per node");
  }
}

Dag Dag::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInput, std::string("graph json: ") + e.what());
  }
  try {
    const auto n = doc.at("nodes").get<std::size_t>();
    auto observed = doc.at("observed").get<std::vector<NodeId>>();
    auto latent = doc.value("latent", std::vector<NodeId>{});
    std::vector<Edge> edges;
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::kInput, "edge must be [from, to]");
      edges.push_back({e[0].get<NodeId>(), e[1].get<NodeId>()});
    }
    auto names = doc.value("names", std::vector<std::string>{});
    return Dag(n, std::move(edges), std::move(observed), std::move(latent), std::move(names));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInput, std::string("graph json: ") + e.what());
  }
}

Dag Dag::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInput, "cannot open graph file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::string Dag::to_json() const {
  nlohmann::json doc;
  doc["nodes"] = node_count_;
  doc["observed"] = observed_;
  doc["latent"] = latent_;
  doc["names"] = names_;
  auto edges = nlohmann::json::array();
  for (const Edge& e : edges_) edges.push_back({e.from, e.to});
  doc["edges"] = std::move(edges);
  return doc.dump();
}

bool Dag::is_observed(NodeId v) const {
  check_node(v);
  return row_[v].has_value();
}

bool Dag::is_latent(NodeId v) const { return !is_observed(v); }

bool Dag::has_edge(NodeId from, NodeId to) const {
  check_node(from);
  check_node(to);
  return children_[from].contains(to);
}

const std::string& Dag::name(NodeId v) const {
  check_node(v);
  return names_[v];
}

NodeId Dag::find(std::string_view name_or_id) const {
  for (NodeId v = 0; v < node_count_; ++v) {
    if (names_[v] == name_or_id) return v;
  }
  NodeId id = 0;
  const auto* first = name_or_id.data();
  const auto* last = first + name_or_id.size();
  auto [ptr, ec] = std::from_chars(first, last, id);
  if (ec == std::errc{} && ptr == last && id < node_count_) return id;
  throw Error(ErrorCode::kInput, "unknown node '" + std::string(name_or_id) + "'");
}

std::size_t Dag::observed_index(NodeId v) const {
  check_node(v);
  if (!row_[v]) throw Error(ErrorCode::kInput, "node " + names_[v] + " is latent");
  return *row_[v];
}

std::size_t Dag::column_index(NodeId v) const {
  check_node(v);
  return column_[v];
}

const NodeSet& Dag::parents(NodeId v) const {
  check_node(v);
  return parents_[v];
}

const NodeSet& Dag::children(NodeId v) const {
  check_node(v);
  return children_[v];
}

Dag Dag::without_edges(const std::vector<Edge>& removed) const {
  std::vector<Edge> kept;
  for (const Edge& e : edges_) {
    if (std::find(removed.begin(), removed.end(), e) == removed.end()) kept.push_back(e);
  }
  return Dag(node_count_, std::move(kept), observed_, latent_, names_);
}

void Dag::check_node(NodeId v) const {
  if (v >= node_count_) throw Error(ErrorCode::kInput, "unknown node id " + std::to_string(v));
}

NodeSet ancestors(const Dag& g, NodeId v) {
  g.check_node(v);
  NodeSet out;
  std::deque<NodeId> todo(g.parents(v).begin(), g.parents(v).end());
  while (!todo.empty()) {
    const NodeId u = todo.front();
    todo.pop_front();
    if (!out.insert(u).second) continue;
    for (NodeId p : g.parents(u)) todo.push_back(p);
  }
  return out;
}

NodeSet descendants(const Dag& g, NodeId v) {
  g.check_node(v);
  NodeSet out;
  std::deque<NodeId> todo(g.children(v).begin(), g.children(v).end());
  while (!todo.empty()) {
    const NodeId u = todo.front();
    todo.pop_front();
    if (!out.insert(u).second) continue;
    for (NodeId c : g.children(u)) todo.push_back(c);
  }
  return out;
}

bool is_canonical(const Dag& g) {
  for (NodeId l : g.latent()) {
    if (!g.parents(l).empty() || g.children(l).size() < 2) return false;
  }
  return true;
}

bool d_separated(const Dag& g, NodeId x, NodeId y, const NodeSet& z) {
  g.check_node(x);
  g.check_node(y);
  for (NodeId v : z) g.check_node(v);
  if (x == y) throw Error(ErrorCode::kInput, "d-separation needs two distinct nodes");
  if (z.contains(x) || z.contains(y)) {
    throw Error(ErrorCode::kInput, "conditioning set must not contain the query nodes");
  }

  // Nodes that are in z or have a descendant in z: colliders there are open.
  NodeSet z_or_ancestor = z;
  for (NodeId v : z) {
    const NodeSet an = ancestors(g, v);
    z_or_ancestor.insert(an.begin(), an.end());
  }

  enum Direction { kUp = 0, kDown = 1 };  // kUp: arrived from a child
  std::vector<std::array<bool, 2>> visited(g.node_count(), {false, false});
  std::deque<std::pair<NodeId, Direction>> todo{{x, kUp}};
  while (!todo.empty()) {
    const auto [v, dir] = todo.front();
    todo.pop_front();
    if (visited[v][dir]) continue;
    visited[v][dir] = true;
    const bool blocked = z.contains(v);
    if (!blocked && v == y) return false;

    if (dir == kUp && !blocked) {
      for (NodeId p : g.parents(v)) todo.emplace_back(p, kUp);
      for (NodeId c : g.children(v)) todo.emplace_back(c, kDown);
    } else if (dir == kDown) {
      if (!blocked) {
        for (NodeId c : g.children(v)) todo.emplace_back(c, kDown);
      }
      if (z_or_ancestor.contains(v)) {
        for (NodeId p : g.parents(v)) todo.emplace_back(p, kUp);
      }
    }
  }
  return true;
}

namespace {

bool shares_latent_ancestor(const Dag& g, NodeId a, NodeId b) {
  const NodeSet an_a = ancestors(g, a);
  const NodeSet an_b = ancestors(g, b);
  for (NodeId v : an_a) {
    if (g.is_latent(v) && an_b.contains(v)) return true;
  }
  return false;
}

bool separated_without_treatment_edges(const Dag& g, NodeId i, const std::vector<NodeId>& treatments,
                                       NodeId y) {
  std::vector<Edge> removed;
  for (NodeId t : treatments) removed.push_back({t, y});
  const Dag cut = g.without_edges(removed);
  return d_separated(cut, i, y, {});
}

}  // namespace

bool is_valid_instrument(const Dag& g, NodeId i, const std::vector<NodeId>& treatments, NodeId y) {
  g.check_node(i);
  g.check_node(y);
  if (treatments.empty()) throw Error(ErrorCode::kInput, "at least one treatment is required");
  for (NodeId t : treatments) g.check_node(t);
  if (i == y) return false;

  for (NodeId t : treatments) {
    if (t == i || !g.parents(t).contains(i)) return false;
    if (shares_latent_ancestor(g, i, t)) return false;
  }
  return separated_without_treatment_edges(g, i, treatments, y);
}

bool is_valid_instrument_for(const Dag& g, NodeId i, NodeId t,
                             const std::vector<NodeId>& all_treatments, NodeId y) {
  g.check_node(i);
  g.check_node(t);
  g.check_node(y);
  for (NodeId s : all_treatments) g.check_node(s);
  if (i == y || i == t) return false;
  if (!g.parents(t).contains(i)) return false;
  if (shares_latent_ancestor(g, i, t)) return false;
  return separated_without_treatment_edges(g, i, all_treatments, y);
}

namespace {

PresetInfo make_proxy(GraphPreset p, std::string name, std::size_t latents, bool proxy_edge) {
  // Observed: Z=0, T=1, Y=2. Latents follow.
  constexpr NodeId z = 0, t = 1, y = 2;
  std::vector<Edge> edges{{t, y}};
  if (proxy_edge) edges.push_back({z, t});
  std::vector<NodeId> latent;
  std::vector<std::string> names{"Z", "T", "Y"};
  for (std::size_t k = 0; k < latents; ++k) {
    const NodeId l = 3 + k;
    latent.push_back(l);
    names.push_back("L" + std::to_string(k + 1));
    edges.push_back({l, z});
    edges.push_back({l, t});
    edges.push_back({l, y});
  }
  Dag dag(3 + latents, std::move(edges), {z, t, y}, std::move(latent), std::move(names));
  return PresetInfo{p, std::move(name), std::move(dag), ProxyRoles{z, t, y}, std::nullopt,
                    latents, {{t, y}}};
}

}  // namespace

PresetInfo preset(GraphPreset p) {
  switch (p) {
    case GraphPreset::kG1: return make_proxy(p, "G1", 1, false);
    case GraphPreset::kG2: return make_proxy(p, "G2", 2, false);
    case GraphPreset::kG3: return make_proxy(p, "G3", 1, true);
    case GraphPreset::kProxyTwoLatentEdge: return make_proxy(p, "PROXY_2LAT_EDGE", 2, true);
    case GraphPreset::kIvTwoTreatmentOneInstrument: {
      // I=0, T1=1, T2=2, Y=3, L1=4, L2=5.
      std::vector<Edge> edges{{0, 1}, {0, 2}, {1, 3}, {2, 3}, {4, 1}, {4, 3}, {5, 2}, {5, 3}};
      Dag dag(6, std::move(edges), {0, 1, 2, 3}, {4, 5}, {"I", "T1", "T2", "Y", "L1", "L2"});
      return PresetInfo{p, "IV_2T_1I", std::move(dag), std::nullopt, IvRoles{{0}, {1, 2}, 3}, 1,
                        {{1, 3}, {2, 3}}};
    }
    case GraphPreset::kIvThreeTreatmentTwoInstrument: {
      // I1=0, I2=1, X1=2, X2=3, T1=4, T2=5, T3=6, Y=7, L1=8, L2=9, L3=10.
      std::vector<Edge> edges{{0, 4}, {0, 5}, {1, 4}, {1, 5},  {1, 6},  {2, 0},
                              {2, 4}, {3, 0}, {3, 5}, {4, 7},  {5, 7},  {8, 4},
                              {8, 7}, {9, 4}, {9, 6}, {9, 7},  {10, 5}, {10, 7}};
      Dag dag(11, std::move(edges), {0, 1, 2, 3, 4, 5, 6, 7}, {8, 9, 10},
              {"I1", "I2", "X1", "X2", "T1", "T2", "T3", "Y", "L1", "L2", "L3"});
      return PresetInfo{p, "IV_3T_2I", std::move(dag), std::nullopt, IvRoles{{0, 1}, {4, 5, 6}, 7},
                        2, {{4, 7}, {5, 7}}};
    }
  }
  throw Error(ErrorCode::kInput, "unknown preset");
}

std::vector<std::string> preset_names() {
  return {"G1", "G2", "G3", "PROXY_2LAT_EDGE", "IV_2T_1I", "IV_3T_2I"};
}

PresetInfo preset(std::string_view name) {
  static constexpr GraphPreset all[] = {
      GraphPreset::kG1,
      GraphPreset::kG2,
      GraphPreset::kG3,
      GraphPreset::kProxyTwoLatentEdge,
      GraphPreset::kIvTwoTreatmentOneInstrument,
      GraphPreset::kIvThreeTreatmentTwoInstrument,
  };
  const auto names = preset_names();
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return preset(all[k]);
  }
  throw Error(ErrorCode::kInput, "unknown preset '" + std::string(name) + "'");
}

}  // namespace lvlingam
