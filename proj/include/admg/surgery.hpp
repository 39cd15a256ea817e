#ifndef ADMG_SURGERY_HPP
#define ADMG_SURGERY_HPP

#include "admg/graph.hpp"
#include "admg/separation.hpp"

namespace admg {

/// Edge classes to drop from a graph. Bidirected edges are only removed
/// through delete_bidirected_into.
struct EdgeFilterSpec {
    NodeSet delete_directed_into;
    NodeSet delete_directed_out_of;
    NodeSet delete_undirected_into;
    NodeSet delete_bidirected_into;
};

inline Admg delete_edges(const Admg& g, const EdgeFilterSpec& spec) {
    g.require_subset(spec.delete_directed_into);
    g.require_subset(spec.delete_directed_out_of);
    g.require_subset(spec.delete_undirected_into);
    g.require_subset(spec.delete_bidirected_into);
    Admg out = g;
    for (auto [a, b] : g.directed_edges()) {
        if (spec.delete_directed_into.contains(b) || spec.delete_directed_out_of.contains(a)) {
            out.remove_directed(a, b);
        }
    }
    for (auto [a, b] : g.undirected_edges()) {
        if (spec.delete_undirected_into.contains(a) || spec.delete_undirected_into.contains(b)) {
            out.remove_undirected(a, b);
        }
    }
    for (auto [a, b] : g.bidirected_edges()) {
        if (spec.delete_bidirected_into.contains(a) || spec.delete_bidirected_into.contains(b)) {
            out.remove_bidirected(a, b);
        }
    }
    return out;
}

/// Graph after setting x by intervention. Edges into x go away, lines through x
/// are replaced by lines between the non-x endpoints, and x keeps only its
/// outgoing directed edges.
inline Admg intervene(const Admg& g, NodeSet x) {
    g.require_subset(x);
    Admg out = g;
    for (int v : x) {
        for (int p : g.parents(v)) out.remove_directed(p, v);
        for (int s : g.spouses(v)) out.remove_bidirected(s, v);
    }
    const NodeSet rest = g.nodes() - x;
    for (int a : rest) {
        bool touches = g.neighbors(a).intersects(x);
        if (!touches) continue;
        for (int b : undirected_reach(g, a, x) & rest) {
            if (b != a) out.add_undirected(a, b);
        }
    }
    for (int v : x) {
        for (int u : g.neighbors(v)) out.remove_undirected(u, v);
    }
    return out;
}

/// Nodes of z that are not ancestors of w in g.
inline NodeSet non_ancestors_of(const Admg& g, NodeSet z, NodeSet w) {
    g.require_subset(z);
    g.require_subset(w);
    return z - g.ancestors_of(w);
}

/// Separation of x and y given z and w after intervening on w.
inline bool separated_after_intervention(const Admg& g, NodeSet x, NodeSet y, NodeSet z, NodeSet w,
                                         Criterion criterion = Criterion::route) {
    if (w.intersects(x) || w.intersects(y) || w.intersects(z)) {
        throw InputError("x, y, z and w must be pairwise disjoint");
    }
    return is_separated(intervene(g, w), x, y, z | w, criterion);
}

} // namespace admg

#endif // ADMG_SURGERY_HPP
