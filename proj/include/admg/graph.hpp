#ifndef ADMG_GRAPH_HPP
#define ADMG_GRAPH_HPP

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "admg/error.hpp"
#include "admg/node_set.hpp"

namespace admg {

enum class EdgeKind { directed, undirected, bidirected };

enum class Relation { parents, children, neighbors, spouses, ancestors, descendants };

/// Acyclic directed mixed graph.
///
/// Nodes are indices into a label table. Subgraph operations keep the label
/// table and shrink the vertex set, so a NodeSet built against a graph stays
/// meaningful for every graph derived from it. Use compacted() to obtain dense
/// indices again.
///
/// Directed edges are stored as parent/child masks, undirected and bidirected
/// edges as symmetric neighbour masks, so each relation holds at most one edge
/// per pair by construction.
class Admg {
public:
    Admg() = default;

    explicit Admg(std::vector<std::string> labels) : labels_(std::move(labels)) {
        if (static_cast<int>(labels_.size()) > kMaxNodes) {
            throw InputError("graph has " + std::to_string(labels_.size()) + " nodes; at most " +
                             std::to_string(kMaxNodes) + " are supported");
        }
        for (int v = 0; v < universe(); ++v) {
            if (labels_[v].empty()) throw InputError("empty node label");
            if (!index_.emplace(labels_[v], v).second) {
                throw InputError("duplicate node label '" + labels_[v] + "'");
            }
        }
        vertices_ = NodeSet::full(universe());
        const auto n = labels_.size();
        parents_.assign(n, {});
        children_.assign(n, {});
        lines_.assign(n, {});
        spouses_.assign(n, {});
    }

    /// Size of the label table (vertex indices range over 0..universe()-1).
    int universe() const { return static_cast<int>(labels_.size()); }
    NodeSet nodes() const { return vertices_; }
    int num_nodes() const { return vertices_.size(); }

    const std::string& label(int v) const { return labels_.at(v); }
    const std::vector<std::string>& labels() const { return labels_; }

    std::optional<int> find(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end() || !vertices_.contains(it->second)) return std::nullopt;
        return it->second;
    }

    int index(std::string_view name) const {
        if (auto v = find(name)) return *v;
        throw InputError("unknown node '" + std::string(name) + "'");
    }

    NodeSet set_of(const std::vector<std::string>& names) const {
        NodeSet s;
        for (const auto& n : names) s.insert(index(n));
        return s;
    }

    std::string format(NodeSet s) const {
        std::string out = "{";
        bool first = true;
        for (int v : s) {
            if (!first) out += ",";
            out += label(v);
            first = false;
        }
        return out + "}";
    }

    void require_subset(NodeSet s, const char* what = "node set") const {
        if (!s.subset_of(vertices_)) {
            throw InputError(std::string(what) + " references an unknown node index");
        }
    }

    bool has_directed(int a, int b) const { return children_[a].contains(b); }
    bool has_undirected(int a, int b) const { return lines_[a].contains(b); }
    bool has_bidirected(int a, int b) const { return spouses_[a].contains(b); }
    bool has_edge(EdgeKind kind, int a, int b) const {
        switch (kind) {
        case EdgeKind::directed: return has_directed(a, b);
        case EdgeKind::undirected: return has_undirected(a, b);
        case EdgeKind::bidirected: return has_bidirected(a, b);
        }
        return false;
    }
    bool adjacent(int a, int b) const {
        return has_directed(a, b) || has_directed(b, a) || has_undirected(a, b) ||
               has_bidirected(a, b);
    }

    NodeSet parents(int v) const { return parents_[v]; }
    NodeSet children(int v) const { return children_[v]; }
    NodeSet neighbors(int v) const { return lines_[v]; }
    NodeSet spouses(int v) const { return spouses_[v]; }

    void add_directed(int a, int b) {
        check_pair(a, b);
        if (has_directed(a, b)) return;
        if (a == b || descendants_of(NodeSet::single(b)).contains(a)) {
            throw GraphError("edge " + labels_[a] + " -> " + labels_[b] + " creates a directed cycle");
        }
        children_[a].insert(b);
        parents_[b].insert(a);
    }
    void add_undirected(int a, int b) {
        check_pair(a, b);
        lines_[a].insert(b);
        lines_[b].insert(a);
    }
    void add_bidirected(int a, int b) {
        check_pair(a, b);
        spouses_[a].insert(b);
        spouses_[b].insert(a);
    }
    void add_edge(EdgeKind kind, int a, int b) {
        switch (kind) {
        case EdgeKind::directed: add_directed(a, b); break;
        case EdgeKind::undirected: add_undirected(a, b); break;
        case EdgeKind::bidirected: add_bidirected(a, b); break;
        }
    }

    void remove_directed(int a, int b) {
        children_[a].erase(b);
        parents_[b].erase(a);
    }
    void remove_undirected(int a, int b) {
        lines_[a].erase(b);
        lines_[b].erase(a);
    }
    void remove_bidirected(int a, int b) {
        spouses_[a].erase(b);
        spouses_[b].erase(a);
    }

    /// Drops v and all incident edges from the vertex set.
    void remove_node(int v) {
        for (int p : parents_[v]) children_[p].erase(v);
        for (int c : children_[v]) parents_[c].erase(v);
        for (int u : lines_[v]) lines_[u].erase(v);
        for (int u : spouses_[v]) spouses_[u].erase(v);
        parents_[v] = children_[v] = lines_[v] = spouses_[v] = NodeSet{};
        vertices_.erase(v);
    }

    std::vector<std::pair<int, int>> directed_edges() const {
        std::vector<std::pair<int, int>> out;
        for (int a : vertices_)
            for (int b : children_[a]) out.emplace_back(a, b);
        return out;
    }
    /// Unordered pairs, low index first.
    std::vector<std::pair<int, int>> undirected_edges() const { return symmetric_edges(lines_); }
    std::vector<std::pair<int, int>> bidirected_edges() const { return symmetric_edges(spouses_); }

    int num_edges() const {
        return static_cast<int>(directed_edges().size() + undirected_edges().size() +
                                bidirected_edges().size());
    }
    bool has_undirected_edges() const { return !undirected_edges().empty(); }
    bool has_bidirected_edges() const { return !bidirected_edges().empty(); }
    bool has_directed_edges() const { return !directed_edges().empty(); }

    /// Reflexive ancestors of x.
    NodeSet ancestors_of(NodeSet x) const { return closure(x, parents_); }
    /// Reflexive descendants of x.
    NodeSet descendants_of(NodeSet x) const { return closure(x, children_); }

    /// Same graph over dense indices 0..num_nodes()-1, preserving label order.
    Admg compacted() const {
        std::vector<std::string> names;
        std::vector<int> remap(labels_.size(), -1);
        for (int v : vertices_) {
            remap[v] = static_cast<int>(names.size());
            names.push_back(labels_[v]);
        }
        Admg out(std::move(names));
        for (auto [a, b] : directed_edges()) out.add_directed(remap[a], remap[b]);
        for (auto [a, b] : undirected_edges()) out.add_undirected(remap[a], remap[b]);
        for (auto [a, b] : bidirected_edges()) out.add_bidirected(remap[a], remap[b]);
        return out;
    }

    /// Structural equality by label: same vertex labels and the same labelled edges.
    friend bool operator==(const Admg& g, const Admg& h) {
        if (g.num_nodes() != h.num_nodes()) return false;
        std::vector<int> map(g.labels_.size(), -1);
        for (int v : g.vertices_) {
            auto w = h.find(g.labels_[v]);
            if (!w) return false;
            map[v] = *w;
        }
        auto same = [&](const std::vector<NodeSet>& gm, const std::vector<NodeSet>& hm) {
            for (int v : g.vertices_) {
                NodeSet mapped;
                for (int u : gm[v]) mapped.insert(map[u]);
                if (mapped != hm[map[v]]) return false;
            }
            return true;
        };
        return same(g.children_, h.children_) && same(g.lines_, h.lines_) &&
               same(g.spouses_, h.spouses_);
    }

private:
    void check_pair(int a, int b) const {
        if (a < 0 || b < 0 || a >= universe() || b >= universe() || !vertices_.contains(a) ||
            !vertices_.contains(b)) {
            throw InputError("edge references an unknown node index");
        }
        if (a == b) throw GraphError("self-loop on node " + labels_[a]);
    }

    std::vector<std::pair<int, int>> symmetric_edges(const std::vector<NodeSet>& adj) const {
        std::vector<std::pair<int, int>> out;
        for (int a : vertices_)
            for (int b : adj[a])
                if (a < b) out.emplace_back(a, b);
        return out;
    }

    static NodeSet closure(NodeSet start, const std::vector<NodeSet>& step) {
        NodeSet seen = start;
        NodeSet frontier = start;
        while (!frontier.empty()) {
            NodeSet next;
            for (int v : frontier) next |= step[v];
            frontier = next - seen;
            seen |= next;
        }
        return seen;
    }

    std::vector<std::string> labels_;
    std::unordered_map<std::string, int> index_;
    NodeSet vertices_;
    std::vector<NodeSet> parents_;
    std::vector<NodeSet> children_;
    std::vector<NodeSet> lines_;
    std::vector<NodeSet> spouses_;
};

// Graph algebra ------------------------------------------------------------

inline NodeSet relatives(const Admg& g, NodeSet x, Relation kind) {
    g.require_subset(x);
    NodeSet out;
    switch (kind) {
    case Relation::parents:
        for (int v : x) out |= g.parents(v);
        return out;
    case Relation::children:
        for (int v : x) out |= g.children(v);
        return out;
    case Relation::neighbors:
        for (int v : x) out |= g.neighbors(v);
        return out;
    case Relation::spouses:
        for (int v : x) out |= g.spouses(v);
        return out;
    case Relation::ancestors: return g.ancestors_of(x);
    case Relation::descendants: return g.descendants_of(x);
    }
    return out;
}

inline NodeSet ancestors(const Admg& g, NodeSet x) { return relatives(g, x, Relation::ancestors); }
inline NodeSet descendants(const Admg& g, NodeSet x) {
    return relatives(g, x, Relation::descendants);
}

inline bool is_ancestral(const Admg& g, NodeSet x) { return ancestors(g, x) == x; }

/// G_X: the vertices in x and every edge with both ends in x.
inline Admg induced_subgraph(const Admg& g, NodeSet x) {
    g.require_subset(x);
    Admg out = g;
    for (int v : g.nodes() - x) out.remove_node(v);
    return out;
}

/// Nodes of `within` reachable from `from` along undirected edges whose
/// intermediate nodes all lie in `through`.
inline NodeSet undirected_reach(const Admg& g, int from, NodeSet through) {
    NodeSet reached;
    NodeSet seen = NodeSet::single(from);
    std::vector<int> stack{from};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u : g.neighbors(v)) {
            reached.insert(u);
            if (through.contains(u) && !seen.contains(u)) {
                seen.insert(u);
                stack.push_back(u);
            }
        }
    }
    return reached;
}

/// G^X: directed and bidirected edges inside x are kept; A - B is present when
/// the two are joined by an undirected path whose inner nodes all lie outside x.
inline Admg marginal_graph(const Admg& g, NodeSet x) {
    g.require_subset(x);
    Admg out = induced_subgraph(g, x);
    const NodeSet outside = g.nodes() - x;
    for (int a : x) {
        for (int b : undirected_reach(g, a, outside) & x) {
            if (b != a) out.add_undirected(a, b);
        }
    }
    return out;
}

/// Classes of undirected connectivity inside G_W, ordered by smallest member.
inline std::vector<NodeSet> undirected_components(const Admg& g, NodeSet w) {
    g.require_subset(w);
    std::vector<NodeSet> comps;
    NodeSet left = w;
    while (!left.empty()) {
        int start = left.first();
        NodeSet comp = (undirected_reach(g, start, w) & w).with(start);
        comps.push_back(comp);
        left -= comp;
    }
    return comps;
}

/// The component of `w` containing v.
inline NodeSet component_of(const Admg& g, NodeSet w, int v) {
    return (undirected_reach(g, v, w) & w).with(v);
}

/// Lexicographically smallest (by label) ordering of w in which every node
/// follows its ancestors in g.
inline std::vector<int> topological_order(const Admg& g, NodeSet w) {
    g.require_subset(w);
    std::vector<int> order;
    NodeSet placed;
    while (placed != w) {
        int best = -1;
        for (int v : w - placed) {
            NodeSet before = (g.ancestors_of(NodeSet::single(v)) & w).without(v);
            if (!before.subset_of(placed)) continue;
            if (best < 0 || g.label(v) < g.label(best)) best = v;
        }
        order.push_back(best);
        placed.insert(best);
    }
    return order;
}

/// True when `order` lists every node of w exactly once, ancestors first.
inline bool is_valid_order(const Admg& g, NodeSet w, const std::vector<int>& order) {
    NodeSet placed;
    for (int v : order) {
        if (!w.contains(v) || placed.contains(v)) return false;
        NodeSet before = (g.ancestors_of(NodeSet::single(v)) & w).without(v);
        if (!before.subset_of(placed)) return false;
        placed.insert(v);
    }
    return placed == w;
}

inline void check_order(const Admg& g, NodeSet w, const std::vector<int>& order) {
    if (!is_valid_order(g, w, order)) {
        throw InputError("order is not a topological order of " + g.format(w));
    }
}

} // namespace admg

#endif // ADMG_GRAPH_HPP
