#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lvlingam {

using NodeId = std::size_t;
using NodeSet = std::set<NodeId>;

struct Edge {
  NodeId from;
  NodeId to;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Directed acyclic graph with an observed/latent partition of its nodes.
///
/// Node ids are dense in [0, node_count). The observed list followed by the
/// latent list fixes the column order of the mixing matrix; row order of the
/// mixing matrix is the observed list. Immutable after construction.
class Dag {
 public:
  /// Throws Error(kInput) on out-of-range ids, self loops, a bad partition or a
  /// directed cycle. Duplicate edges are merged.
  Dag(std::size_t node_count, std::vector<Edge> edges, std::vector<NodeId> observed,
      std::vector<NodeId> latent, std::vector<std::string> names = {});

  /// Parses `{"nodes": N, "observed": [...], "latent": [...], "edges": [[i,j],...]}`
  /// with an optional `"names": [...]` array.
  static Dag from_json(std::string_view text);
  static Dag from_json_file(const std::string& path);
  std::string to_json() const;

  std::size_t node_count() const { return node_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<NodeId>& observed() const { return observed_; }
  const std::vector<NodeId>& latent() const { return latent_; }
  const std::vector<std::string>& names() const { return names_; }

  bool is_observed(NodeId v) const;
  bool is_latent(NodeId v) const;
  bool has_edge(NodeId from, NodeId to) const;

  const std::string& name(NodeId v) const;
  /// Looks a node up by name, falling back to a decimal id.
  NodeId find(std::string_view name_or_id) const;

  /// Row index of an observed node in the mixing matrix.
  std::size_t observed_index(NodeId v) const;
  /// Column index of any node in the mixing matrix (observed first, then latent).
  std::size_t column_index(NodeId v) const;

  const NodeSet& parents(NodeId v) const;
  const NodeSet& children(NodeId v) const;

  /// Deterministic topological order (Kahn's algorithm, smallest id first).
  const std::vector<NodeId>& topological_order() const { return topo_; }

  /// Copy of this graph without the listed edges.
  Dag without_edges(const std::vector<Edge>& removed) const;

  void check_node(NodeId v) const;

 private:
  std::size_t node_count_;
  std::vector<Edge> edges_;
  std::vector<NodeId> observed_;
  std::vector<NodeId> latent_;
  std::vector<std::string> names_;
  std::vector<NodeSet> parents_;
  std::vector<NodeSet> children_;
  std::vector<std::size_t> column_;
  std::vector<std::optional<std::size_t>> row_;
  std::vector<NodeId> topo_;
};

/// All u with a directed path u -> ... -> v, excluding v.
NodeSet ancestors(const Dag& g, NodeId v);
/// All u with a directed path v -> ... -> u, excluding v.
NodeSet descendants(const Dag& g, NodeId v);

/// Every latent node has no parents and at least two children.
bool is_canonical(const Dag& g);

/// d-separation of x and y given z, via the reachable-set (Bayes-ball) procedure.
bool d_separated(const Dag& g, NodeId x, NodeId y, const NodeSet& z);

/// Instrument validity for a set of treatments on outcome y:
///  (a) i is a parent of every treatment;
///  (b) i shares no latent ancestor with any treatment;
///  (c) i and y are d-separated once every treatment -> y edge is removed.
bool is_valid_instrument(const Dag& g, NodeId i, const std::vector<NodeId>& treatments,
                         NodeId y);

/// Validity of i for a single treatment t when several treatments act on y.
/// Condition (c) removes the edges from all of `all_treatments` into y.
bool is_valid_instrument_for(const Dag& g, NodeId i, NodeId t,
                             const std::vector<NodeId>& all_treatments, NodeId y);

enum class GraphPreset {
  kG1,
  kG2,
  kG3,
  kProxyTwoLatentEdge,
  kIvTwoTreatmentOneInstrument,
  kIvThreeTreatmentTwoInstrument,
};

/// Causal roles attached to a preset: either a proxy triple or an
/// instrumental-variable layout.
struct ProxyRoles {
  NodeId proxy;
  NodeId treatment;
  NodeId outcome;
};

struct IvRoles {
  std::vector<NodeId> instruments;
  std::vector<NodeId> treatments;
  NodeId outcome;
};

struct PresetInfo {
  GraphPreset preset;
  std::string name;
  Dag dag;
  std::optional<ProxyRoles> proxy;
  std::optional<IvRoles> iv;
  /// Number of latent confounders the proxy estimators are run with.
  std::size_t latent_count;
  /// Effects reported by the experiment harness, as (cause, effect) pairs.
  std::vector<std::pair<NodeId, NodeId>> effects_of_interest;
};

PresetInfo preset(GraphPreset p);
PresetInfo preset(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace lvlingam
