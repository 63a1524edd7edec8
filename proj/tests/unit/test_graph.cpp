#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "lvlingam/errors.hpp"
#include "lvlingam/graph.hpp"
#include "oracles.hpp"

using namespace lvlingam;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInput;
}

Dag random_dag(std::mt19937_64& rng, std::size_t p, double density) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<NodeId> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Edge> edges;
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a + 1; b < p; ++b) {
      if (u(rng) < density) edges.push_back({order[a], order[b]});
    }
  }
  std::vector<NodeId> observed, latent;
  for (NodeId v = 0; v < p; ++v) (u(rng) < 0.25 ? latent : observed).push_back(v);
  if (observed.empty()) {
    observed.push_back(latent.back());
    latent.pop_back();
  }
  return Dag(p, edges, observed, latent);
}

void expect_dsep_matches_oracle(const Dag& g) {
  const std::size_t p = g.node_count();
  for (NodeId x = 0; x < p; ++x) {
    for (NodeId y = x + 1; y < p; ++y) {
      std::vector<NodeId> rest;
      for (NodeId v = 0; v < p; ++v) {
        if (v != x && v != y) rest.push_back(v);
      }
      for (unsigned mask = 0; mask < (1u << rest.size()); ++mask) {
        NodeSet z;
        for (std::size_t k = 0; k < rest.size(); ++k) {
          if ((mask >> k) & 1u) z.insert(rest[k]);
        }
        ASSERT_EQ(d_separated(g, x, y, z), oracle::d_separated(g, x, y, z))
            << "x=" << x << " y=" << y << " |z|=" << z.size() << "\n" << g.to_json();
        ASSERT_EQ(d_separated(g, x, y, z), d_separated(g, y, x, z));
      }
    }
  }
}

}  // namespace

TEST(Dag, RejectsMalformedGraphs) {
  EXPECT_EQ(code_of([] { Dag(2, {{0, 1}, {1, 0}}, {0, 1}, {}); }), ErrorCode::kInput);
  EXPECT_EQ(code_of([] { Dag(2, {{0, 0}}, {0, 1}, {}); }), ErrorCode::kInput);
  EXPECT_EQ(code_of([] { Dag(2, {{0, 2}}, {0, 1}, {}); }), ErrorCode::kInput);
  EXPECT_EQ(code_of([] { Dag(3, {}, {0, 1}, {}); }), ErrorCode::kInput);
  EXPECT_EQ(code_of([] { Dag(2, {}, {0, 1}, {1}); }), ErrorCode::kInput);
}

TEST(Dag, MergesDuplicateEdgesAndIndexesColumns) {
  const Dag g(4, {{3, 0}, {3, 0}, {0, 1}, {3, 2}}, {0, 1, 2}, {3});
  EXPECT_EQ(g.edges().size(), 3u);
  EXPECT_EQ(g.column_index(3), 3u);
  EXPECT_EQ(g.observed_index(2), 2u);
  EXPECT_TRUE(g.has_edge(3, 0));
  EXPECT_FALSE(g.has_edge(0, 3));
}

TEST(Dag, JsonRoundTrip) {
  const Dag g = preset("IV_2T_1I").dag;
  const Dag h = Dag::from_json(g.to_json());
  EXPECT_EQ(h.edges(), g.edges());
  EXPECT_EQ(h.observed(), g.observed());
  EXPECT_EQ(h.latent(), g.latent());
  EXPECT_EQ(h.names(), g.names());
  EXPECT_EQ(h.find("T2"), 2u);
  EXPECT_THROW(Dag::from_json("{\"nodes\": 2}"), Error);
}

TEST(Dag, AncestorsMatchOracle) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const Dag g = random_dag(rng, 7, 0.4);
    for (NodeId v = 0; v < 7; ++v) {
      const auto an = ancestors(g, v);
      const auto oan = oracle::ancestors(g, v);
      EXPECT_EQ(std::set<NodeId>(an.begin(), an.end()), oan);
      const auto de = descendants(g, v);
      EXPECT_EQ(std::set<NodeId>(de.begin(), de.end()), oracle::descendants(g, v));
    }
  }
}

TEST(Dag, CanonicalPresets) {
  for (const auto& name : preset_names()) EXPECT_TRUE(is_canonical(preset(name).dag)) << name;
  // latent with a parent
  EXPECT_FALSE(is_canonical(Dag(4, {{0, 2}, {2, 1}, {2, 3}}, {0, 1, 3}, {2})));
  // latent with a single child
  EXPECT_FALSE(is_canonical(Dag(3, {{2, 1}, {0, 1}}, {0, 1}, {2})));
}

TEST(DSeparation, TextbookCases) {
  // chain 0 -> 1 -> 2, collider 0 -> 3 <- 2, 3 -> 4
  const Dag g(5, {{0, 1}, {1, 2}, {0, 3}, {2, 3}, {3, 4}}, {0, 1, 2, 3, 4}, {});
  EXPECT_FALSE(d_separated(g, 0, 2, {}));
  EXPECT_TRUE(d_separated(g, 0, 2, {1}));
  EXPECT_FALSE(d_separated(g, 0, 2, {1, 3}));
  EXPECT_FALSE(d_separated(g, 0, 2, {1, 4}));
}

TEST(DSeparation, MatchesPathEnumerationOnPresets) {
  for (const auto& name : preset_names()) {
    const Dag g = preset(name).dag;
    if (g.node_count() <= 7) expect_dsep_matches_oracle(g);
  }
}

TEST(DSeparation, MatchesPathEnumerationOnRandomGraphs) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 40; ++rep) {
    expect_dsep_matches_oracle(random_dag(rng, 6 + rep % 2, 0.2 + 0.1 * (rep % 4)));
  }
}

TEST(Instrument, TwoTreatmentGraph) {
  const PresetInfo info = preset("IV_2T_1I");
  const Dag& g = info.dag;
  EXPECT_TRUE(is_valid_instrument(g, 0, {1, 2}, 3));
  // T1 is a parent of Y, not of T2.
  EXPECT_FALSE(is_valid_instrument(g, 1, {2}, 3));
  // I -> Y opens a path that bypasses the treatments.
  const Dag direct(6, {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {4, 1}, {4, 3}, {5, 2}, {5, 3}, {0, 3}},
                   g.observed(), g.latent(), g.names());
  EXPECT_FALSE(is_valid_instrument(direct, 0, {1, 2}, 3));
  // L1 -> I: instrument confounded with T1.
  const Dag confounded(6, {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {4, 1}, {4, 3}, {5, 2}, {5, 3}, {4, 0}},
                       g.observed(), g.latent(), g.names());
  EXPECT_FALSE(is_valid_instrument(confounded, 0, {1, 2}, 3));
  EXPECT_TRUE(is_valid_instrument_for(g, 0, 1, {1, 2}, 3));
}

TEST(Instrument, MatchesOracleOnPerturbations) {
  const Dag base = preset("IV_2T_1I").dag;
  const std::vector<NodeId> treatments{1, 2};
  std::vector<Edge> extra_candidates;
  for (NodeId a = 0; a < 6; ++a) {
    for (NodeId b = 0; b < 4; ++b) {
      if (a != b && !base.has_edge(a, b) && !base.has_edge(b, a)) extra_candidates.push_back({a, b});
    }
  }
  int checked = 0;
  for (const Edge& e : extra_candidates) {
    std::vector<Edge> edges = base.edges();
    edges.push_back(e);
    try {
      const Dag g(6, edges, base.observed(), base.latent(), base.names());
      for (NodeId i = 0; i < 4; ++i) {
        if (i == 3 || i == 1 || i == 2) continue;
        EXPECT_EQ(is_valid_instrument(g, i, treatments, 3), oracle::valid_instrument(g, i, treatments, 3));
        for (NodeId t : treatments) {
          EXPECT_EQ(is_valid_instrument_for(g, i, t, treatments, 3),
                    oracle::valid_instrument_for(g, i, t, treatments, 3));
        }
        ++checked;
      }
    } catch (const Error&) {
      // the extra edge closed a cycle
    }
  }
  EXPECT_GT(checked, 5);
}

TEST(Instrument, MultiInstrumentPreset) {
  const PresetInfo info = preset("IV_3T_2I");
  const auto& iv = *info.iv;
  for (NodeId i : iv.instruments) {
    for (NodeId t : iv.treatments) {
      EXPECT_EQ(is_valid_instrument_for(info.dag, i, t, iv.treatments, iv.outcome),
                oracle::valid_instrument_for(info.dag, i, t, iv.treatments, iv.outcome));
    }
  }
  EXPECT_TRUE(is_valid_instrument_for(info.dag, 0, 4, iv.treatments, iv.outcome));
  EXPECT_FALSE(is_valid_instrument_for(info.dag, 0, 6, iv.treatments, iv.outcome));
}

TEST(Presets, NamesResolve) {
  for (const auto& name : preset_names()) EXPECT_EQ(preset(name).name, name);
  EXPECT_EQ(code_of([] { preset("nope"); }), ErrorCode::kInput);
  EXPECT_EQ(preset("G2").latent_count, 2u);
  EXPECT_TRUE(preset("G3").dag.has_edge(0, 1));
  EXPECT_FALSE(preset("G1").dag.has_edge(0, 1));
}
