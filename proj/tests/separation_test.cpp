#include <gtest/gtest.h>

#include <random>

#include "admg/dsl.hpp"
#include "admg/separation.hpp"
#include "admg/surgery.hpp"
#include "support.hpp"

using namespace admg;
using testing_support::load_graph;

namespace {

// d-separation through the moralized ancestral graph.
bool moral_dsep(const Admg& g, NodeSet x, NodeSet y, NodeSet z) {
    NodeSet keep = g.ancestors_of(x | y | z);
    int n = g.universe();
    std::vector<NodeSet> adj(n);
    for (int v : keep) {
        NodeSet pa = g.parents(v) & keep;
        for (int p : pa) {
            adj[p].insert(v);
            adj[v].insert(p);
            for (int q : pa)
                if (q != p) adj[p].insert(q);
        }
    }
    NodeSet seen = x;
    std::vector<int> stack(x.begin(), x.end());
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u : adj[v] - z) {
            if (!seen.contains(u)) {
                seen.insert(u);
                stack.push_back(u);
            }
        }
    }
    return !seen.intersects(y);
}

// Re-check of a witness against the path clauses, written out separately.
bool witness_connects(const Admg& g, const Witness& w, NodeSet z) {
    if (w.nodes.size() != w.links.size() + 1) return false;
    NodeSet seen;
    for (int v : w.nodes) {
        if (seen.contains(v)) return false;
        seen.insert(v);
    }
    for (std::size_t i = 0; i < w.links.size(); ++i) {
        int a = w.nodes[i], b = w.nodes[i + 1];
        bool ok = false;
        switch (w.links[i]) {
        case Link::forward: ok = g.has_directed(a, b); break;
        case Link::backward: ok = g.has_directed(b, a); break;
        case Link::undirected: ok = g.has_undirected(a, b); break;
        case Link::bidirected: ok = g.has_bidirected(a, b); break;
        }
        if (!ok) return false;
    }
    NodeSet anz = ancestors(g, z);
    for (std::size_t i = 1; i + 1 < w.nodes.size(); ++i) {
        int c = w.nodes[i];
        Link in = w.links[i - 1], out = w.links[i];
        bool head_in = in == Link::forward || in == Link::bidirected;
        bool head_out = out == Link::backward || out == Link::bidirected;
        bool line_in = in == Link::undirected, line_out = out == Link::undirected;
        bool collider = (head_in && (head_out || line_out)) || (line_in && head_out);
        if (collider) {
            if (!anz.contains(c)) return false;
        } else if (z.contains(c)) {
            bool escape = line_in && line_out && (!(g.parents(c) - z).empty() || !g.spouses(c).empty());
            if (!escape) return false;
        }
    }
    return true;
}

} // namespace

TEST(Separation, Fig4NeverSeparated) {
    Admg g = load_graph("fig4a.admg");
    int a = g.index("A"), e = g.index("E"), b = g.index("B");
    for (NodeSet z : {NodeSet{}, NodeSet::single(b)}) {
        auto w = connects_by_path(g, a, e, z);
        ASSERT_TRUE(w.has_value());
        EXPECT_TRUE(witness_connects(g, *w, z));
        EXPECT_TRUE(connects_by_route(g, a, e, z));
    }
    Admg only_bi = parse_graph("nodes A B E\nA -> B\nB <-> E\n");
    auto w = connects_by_path(only_bi, 0, 2, NodeSet::single(1));
    ASSERT_TRUE(w.has_value());
    EXPECT_EQ(w->render(only_bi), "A -> B <-> E");
}

TEST(Separation, IsolatedNodes) {
    Admg g = parse_graph("nodes A B\n");
    EXPECT_FALSE(connects_by_path(g, 0, 1, {}).has_value());
    EXPECT_FALSE(connects_by_route(g, 0, 1, {}));
    EXPECT_TRUE(is_separated(g, NodeSet::single(0), NodeSet::single(1), {}));
}

TEST(Separation, Fig1Blocking) {
    Admg g = load_graph("fig1.admg");
    int a = g.index("A"), b = g.index("B"), c = g.index("C");
    Admg no_arrow = g;
    no_arrow.remove_directed(a, b);
    EXPECT_FALSE(connects_by_path(no_arrow, a, b, NodeSet::single(c)).has_value());
    EXPECT_TRUE(connects_by_path(no_arrow, a, b, {}).has_value());
    EXPECT_FALSE(is_separated(g, NodeSet::single(a), NodeSet::single(b), NodeSet::single(c)));
}

TEST(Separation, AdjacentAlwaysConnected) {
    for (const auto& g : testing_support::all_admgs(2)) {
        if (g.num_edges() == 0) continue;
        EXPECT_TRUE(connects_by_route(g, 0, 1, {}));
    }
}

TEST(Separation, QueryValidation) {
    Admg g = load_graph("fig1.admg");
    NodeSet a = g.set_of({"A"}), b = g.set_of({"B"});
    EXPECT_THROW(separated(g, a, a, {}), InputError);
    EXPECT_THROW(separated(g, a, b, a), InputError);
    EXPECT_THROW(separated(g, {}, b, {}), InputError);
}

TEST(Separation, WitnessesValidate) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        Admg g = testing_support::random_admg(5, rng);
        for (int a = 0; a < 5; ++a) {
            for (int b = a + 1; b < 5; ++b) {
                NodeSet rest = g.nodes().without(a).without(b);
                for_each_subset(rest, [&](NodeSet z) {
                    auto r = separated(g, NodeSet::single(a), NodeSet::single(b), z, Criterion::route);
                    if (!r.separated) {
                        ASSERT_TRUE(r.witness.has_value());
                        ASSERT_TRUE(witness_connects(g, *r.witness, z));
                    }
                });
            }
        }
    }
}

TEST(Separation, ReducesToDSeparationOnDags) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        Admg g = testing_support::random_admg(6, rng, {0.4, 0.0, 0.0});
        for (int a = 0; a < 6; ++a) {
            for (int b = a + 1; b < 6; ++b) {
                NodeSet rest = g.nodes().without(a).without(b);
                for_each_subset(rest, [&](NodeSet z) {
                    NodeSet x = NodeSet::single(a), y = NodeSet::single(b);
                    ASSERT_EQ(is_separated(g, x, y, z), moral_dsep(g, x, y, z));
                });
            }
        }
    }
}

TEST(Separation, PathAndRouteAgreeExhaustivelyOnThreeNodes) {
    int mismatches = 0;
    for (const auto& g : testing_support::all_admgs(3)) {
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                if (a == b) continue;
                for_each_subset(g.nodes().without(a).without(b), [&](NodeSet z) {
                    if (connects_by_path(g, a, b, z).has_value() != connects_by_route(g, a, b, z)) ++mismatches;
                });
            }
    }
    EXPECT_EQ(mismatches, 0);
}

TEST(Magnify, Fig5) {
    Admg g = load_graph("fig5.admg");
    Magnified m = magnify(g);
    EXPECT_EQ(m.graph.num_nodes(), 13);
    EXPECT_FALSE(m.graph.has_bidirected_edges());
    for (auto [a, b] : m.graph.undirected_edges()) {
        EXPECT_FALSE(m.original.contains(a));
        EXPECT_FALSE(m.original.contains(b));
    }
    Admg expected = parse_graph(R"(
nodes A B C D E F eps_A eps_B eps_C eps_D eps_E eps_F lambda_E_F
A -> B
A -> C
A -> D
B -> D
E -> F
eps_A -> A
eps_B -> B
eps_C -> C
eps_D -> D
eps_E -> E
eps_F -> F
lambda_E_F -> E
lambda_E_F -> F
eps_C -- eps_D
eps_C -- eps_E
eps_D -- eps_F
eps_E -- eps_F
)");
    EXPECT_EQ(m.graph, expected);
}

TEST(Magnify, EmptyGraphGainsErrorParents) {
    Admg g = parse_graph("nodes A B C\n");
    Magnified m = magnify(g);
    EXPECT_EQ(m.graph.num_nodes(), 6);
    EXPECT_EQ(m.graph.num_edges(), 3);
}

TEST(Magnify, SameSeparationsOverV) {
    int mismatches = 0;
    for (const auto& g : testing_support::all_admgs(3)) {
        Magnified m = magnify(g);
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b)
                for_each_subset(g.nodes().without(a).without(b), [&](NodeSet z) {
                    NodeSet x = NodeSet::single(a), y = NodeSet::single(b);
                    if (is_separated(g, x, y, z) != is_separated_magnified(m, x, y, z)) ++mismatches;
                });
    }
    EXPECT_EQ(mismatches, 0);
}

TEST(Surgery, InterveneFig1) {
    Admg g = load_graph("fig1.admg");
    EXPECT_EQ(serialize_graph(intervene(g, g.set_of({"A"}))), "nodes A B C\nA -> B\nB -- C\n");
    EXPECT_EQ(serialize_graph(intervene(g, g.set_of({"C"}))), "nodes A B C\nA -- B\nA -> B\n");
    EXPECT_EQ(intervene(g, {}), g);
}

TEST(Surgery, InterveneOnOadmgIsPearlSurgery) {
    Admg g = load_graph("fig1_oadmg.admg");
    Admg h = intervene(g, g.set_of({"B"}));
    EXPECT_EQ(serialize_graph(h), "nodes A B C\nA <-> C\n");
}

TEST(Surgery, InterveneComposes) {
    for (const auto& g : testing_support::all_admgs(3)) {
        for_each_subset(g.nodes(), [&](NodeSet x) {
            for_each_subset(g.nodes() - x, [&](NodeSet y) {
                ASSERT_EQ(intervene(intervene(g, x), y), intervene(g, x | y));
            });
        });
    }
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 300; ++trial) {
        Admg g = testing_support::random_admg(5, rng);
        NodeSet x = NodeSet(rng() & 31), y = NodeSet(rng() & 31) - x;
        Admg h = intervene(g, x | y);
        ASSERT_EQ(intervene(intervene(g, x), y), h);
        for (auto [a, b] : h.directed_edges()) ASSERT_TRUE(g.has_directed(a, b));
        for (auto [a, b] : h.bidirected_edges()) ASSERT_TRUE(g.has_bidirected(a, b));
    }
}

TEST(Surgery, InterveneMatchesMagnifiedErrorMarginal) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 300; ++trial) {
        Admg g = testing_support::random_admg(5, rng);
        NodeSet x = NodeSet(rng() & 31);
        Admg h = intervene(g, x);
        Magnified m = magnify(g);
        int n = g.universe();
        // error nodes are the last n nodes of the magnified graph
        int eps0 = m.graph.universe() - n;
        NodeSet keep;
        for (int v : g.nodes() - x) keep.insert(eps0 + v);
        NodeSet errors;
        for (int v = 0; v < n; ++v) errors.insert(eps0 + v);
        Admg eg = marginal_graph(induced_subgraph(m.graph, errors), keep);
        for (int a : g.nodes() - x)
            for (int b : g.nodes() - x)
                if (a < b) {
                    ASSERT_EQ(h.has_undirected(a, b), eg.has_undirected(eps0 + a, eps0 + b));
                }
    }
}

TEST(Surgery, DeleteEdges) {
    Admg g = load_graph("fig2_oadmg.admg");
    EdgeFilterSpec spec;
    spec.delete_directed_out_of = g.set_of({"A"});
    EXPECT_EQ(serialize_graph(delete_edges(g, spec)), "nodes A B C\nA <-> C\nB <-> C\n");
    EXPECT_EQ(delete_edges(g, {}), g);
    Admg h = parse_graph("nodes A B\nA -> B\nA -- B\n");
    EdgeFilterSpec into;
    into.delete_directed_into = h.set_of({"B"});
    EXPECT_EQ(serialize_graph(delete_edges(h, into)), "nodes A B\nA -- B\n");
}

TEST(Surgery, NonAncestors) {
    Admg g = load_graph("fig1.admg");
    EXPECT_EQ(non_ancestors_of(g, g.set_of({"C"}), {}), g.set_of({"C"}));
    Admg ab = parse_graph("nodes A B\nA -> B\n");
    EXPECT_TRUE(non_ancestors_of(ab, ab.set_of({"A"}), ab.set_of({"B"})).empty());
    EXPECT_TRUE(non_ancestors_of(g, {}, {}).empty());
}

TEST(Surgery, SeparationAfterIntervention) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        Admg g = testing_support::random_admg(5, rng, {0.4, 0.0, 0.3});
        for (int a = 0; a < 5; ++a)
            for (int b = a + 1; b < 5; ++b) {
                if (g.adjacent(a, b)) continue;
                NodeSet w = g.nodes().without(a).without(b);
                EXPECT_TRUE(separated_after_intervention(g, NodeSet::single(a), NodeSet::single(b), {}, w));
            }
    }
    Admg g = load_graph("fig1.admg");
    EXPECT_FALSE(separated_after_intervention(g, g.set_of({"C"}), g.set_of({"B"}), {}, g.set_of({"A"})));
    EXPECT_EQ(separated_after_intervention(g, g.set_of({"A"}), g.set_of({"B"}), {}, {}),
              is_separated(g, g.set_of({"A"}), g.set_of({"B"}), {}));
}
