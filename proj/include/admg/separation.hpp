#ifndef ADMG_SEPARATION_HPP
#define ADMG_SEPARATION_HPP

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "admg/error.hpp"
#include "admg/graph.hpp"

namespace admg {

/// Mark an edge carries at one of its endpoints.
enum class Mark { tail, head, line };

/// One traversed edge of a path: `a <link> b` read from a to b.
enum class Link { forward, backward, undirected, bidirected };

inline Mark mark_at_source(Link l) {
    switch (l) {
    case Link::forward: return Mark::tail;
    case Link::backward: return Mark::head;
    case Link::undirected: return Mark::line;
    case Link::bidirected: return Mark::head;
    }
    return Mark::tail;
}

inline Mark mark_at_target(Link l) {
    switch (l) {
    case Link::forward: return Mark::head;
    case Link::backward: return Mark::tail;
    case Link::undirected: return Mark::line;
    case Link::bidirected: return Mark::head;
    }
    return Mark::tail;
}

/// C is a collider when the edges meeting at it show A o-> C <-o B or A o-> C - B.
inline bool is_collider(Mark arrive, Mark leave) {
    if (arrive == Mark::head) return leave == Mark::head || leave == Mark::line;
    if (arrive == Mark::line) return leave == Mark::head;
    return false;
}

struct Witness {
    std::vector<int> nodes;
    std::vector<Link> links; // links[i] joins nodes[i] and nodes[i+1]

    std::string render(const Admg& g) const {
        if (nodes.empty()) return {};
        std::string out = g.label(nodes[0]);
        for (std::size_t i = 0; i < links.size(); ++i) {
            switch (links[i]) {
            case Link::forward: out += " -> "; break;
            case Link::backward: out += " <- "; break;
            case Link::undirected: out += " -- "; break;
            case Link::bidirected: out += " <-> "; break;
            }
            out += g.label(nodes[i + 1]);
        }
        return out;
    }
};

/// Every edge incident to v as (neighbour, link read from v).
inline std::vector<std::pair<int, Link>> incident_links(const Admg& g, int v) {
    std::vector<std::pair<int, Link>> out;
    for (int u : g.children(v)) out.emplace_back(u, Link::forward);
    for (int u : g.parents(v)) out.emplace_back(u, Link::backward);
    for (int u : g.neighbors(v)) out.emplace_back(u, Link::undirected);
    for (int u : g.spouses(v)) out.emplace_back(u, Link::bidirected);
    return out;
}

/// Accepts or rejects a complete candidate path; used to restrict the path search.
using PathFilter = std::function<bool(const Witness&)>;

/// Path criterion: a simple path between a and b on which every collider is in
/// An(z) and every non-collider is outside z, except a line-line non-collider C
/// with Pa(C)\z or Sp(C) nonempty.
inline std::optional<Witness> connects_by_path(const Admg& g, int a, int b, NodeSet z,
                                               const PathFilter& accept = {}) {
    if (a == b) throw InputError("path endpoints must differ");
    if (z.contains(a) || z.contains(b)) throw InputError("path endpoints must lie outside z");
    const NodeSet an_z = g.ancestors_of(z);

    Witness path;
    path.nodes.push_back(a);
    NodeSet visited = NodeSet::single(a);
    std::optional<Witness> found;

    auto passes = [&](int c, Mark arrive, Mark leave) {
        if (is_collider(arrive, leave)) return an_z.contains(c);
        if (!z.contains(c)) return true;
        return arrive == Mark::line && leave == Mark::line &&
               (!(g.parents(c) - z).empty() || !g.spouses(c).empty());
    };

    std::function<bool(int, std::optional<Mark>)> dfs = [&](int v, std::optional<Mark> arrive) {
        for (auto [u, link] : incident_links(g, v)) {
            if (visited.contains(u)) continue;
            if (arrive && !passes(v, *arrive, mark_at_source(link))) continue;
            path.nodes.push_back(u);
            path.links.push_back(link);
            if (u == b) {
                if (!accept || accept(path)) {
                    found = path;
                    return true;
                }
            } else {
                visited.insert(u);
                if (dfs(u, mark_at_target(link))) return true;
                visited.erase(u);
            }
            path.nodes.pop_back();
            path.links.pop_back();
        }
        return false;
    };
    dfs(a, std::nullopt);
    return found;
}

/// Route criterion, decided by reachability over (node, arrival mark) states:
/// colliders must be in z; non-colliders outside z unless line-line with Sp(C) nonempty.
inline bool connects_by_route(const Admg& g, int a, int b, NodeSet z) {
    if (a == b) throw InputError("route endpoints must differ");
    if (z.contains(a) || z.contains(b)) throw InputError("route endpoints must lie outside z");

    std::vector<std::array<bool, 3>> seen(g.universe(), {false, false, false});
    std::vector<std::pair<int, Mark>> stack;
    auto push = [&](int u, Mark m) {
        auto& s = seen[u][static_cast<int>(m)];
        if (!s) {
            s = true;
            stack.emplace_back(u, m);
        }
    };
    for (auto [u, link] : incident_links(g, a)) push(u, mark_at_target(link));
    while (!stack.empty()) {
        auto [v, arrive] = stack.back();
        stack.pop_back();
        if (v == b) return true;
        for (auto [u, link] : incident_links(g, v)) {
            const Mark leave = mark_at_source(link);
            bool ok;
            if (is_collider(arrive, leave)) {
                ok = z.contains(v);
            } else {
                ok = !z.contains(v) ||
                     (arrive == Mark::line && leave == Mark::line && !g.spouses(v).empty());
            }
            if (ok) push(u, mark_at_target(link));
        }
    }
    return false;
}

enum class Criterion { path, route };

struct SeparationResult {
    bool separated = true;
    std::optional<Witness> witness;
};

inline void validate_query(const Admg& g, NodeSet x, NodeSet y, NodeSet z) {
    g.require_subset(x, "x");
    g.require_subset(y, "y");
    g.require_subset(z, "z");
    if (x.empty() || y.empty()) throw InputError("x and y must be nonempty");
    if (x.intersects(y) || x.intersects(z) || y.intersects(z)) {
        throw InputError("x, y and z must be pairwise disjoint");
    }
}

inline SeparationResult separated(const Admg& g, NodeSet x, NodeSet y, NodeSet z,
                                  Criterion criterion = Criterion::route) {
    validate_query(g, x, y, z);
    for (int a : x) {
        for (int b : y) {
            if (criterion == Criterion::path) {
                if (auto w = connects_by_path(g, a, b, z)) return {false, w};
            } else if (connects_by_route(g, a, b, z)) {
                return {false, connects_by_path(g, a, b, z)};
            }
        }
    }
    return {};
}

inline bool is_separated(const Admg& g, NodeSet x, NodeSet y, NodeSet z,
                         Criterion criterion = Criterion::route) {
    validate_query(g, x, y, z);
    for (int a : x) {
        for (int b : y) {
            bool con = criterion == Criterion::path ? connects_by_path(g, a, b, z).has_value()
                                                    : connects_by_route(g, a, b, z);
            if (con) return false;
        }
    }
    return true;
}

/// Result of magnify(): the expanded graph plus the original nodes inside it.
struct Magnified {
    Admg graph;
    NodeSet original;
    NodeSet latent; // lambda nodes
    NodeSet errors; // eps nodes
};

/// Each A <-> B becomes A <- lambda_A_B -> B, every node A gains eps_A -> A and
/// each A - B moves to eps_A - eps_B. Original nodes keep their indices.
inline Magnified magnify(const Admg& g) {
    const Admg base = g.compacted();
    std::vector<std::string> labels = base.labels();
    const int n = base.universe();
    const auto bi = base.bidirected_edges();
    for (auto [a, b] : bi) labels.push_back("lambda_" + base.label(a) + "_" + base.label(b));
    for (int v = 0; v < n; ++v) labels.push_back("eps_" + base.label(v));

    Admg out(std::move(labels));
    for (auto [a, b] : base.directed_edges()) out.add_directed(a, b);
    int lam = n;
    for (auto [a, b] : bi) {
        out.add_directed(lam, a);
        out.add_directed(lam, b);
        ++lam;
    }
    const int eps0 = lam;
    for (int v = 0; v < n; ++v) out.add_directed(eps0 + v, v);
    for (auto [a, b] : base.undirected_edges()) out.add_undirected(eps0 + a, eps0 + b);
    NodeSet latent, errors;
    for (int v = n; v < eps0; ++v) latent.insert(v);
    for (int v = eps0; v < eps0 + n; ++v) errors.insert(v);
    return {std::move(out), NodeSet::full(n), latent, errors};
}

/// Dt(z) in a magnified graph: z plus every latent or error parent u of a node
/// A with A and Pa(A)\{u} already determined.
inline NodeSet determined_closure(const Magnified& m, NodeSet z) {
    NodeSet dt = z;
    const NodeSet hidden = m.latent | m.errors;
    bool grew = true;
    while (grew) {
        grew = false;
        for (int a : dt & m.original) {
            for (int u : m.graph.parents(a) & hidden) {
                if (dt.contains(u)) continue;
                if ((m.graph.parents(a).without(u)).subset_of(dt)) {
                    dt.insert(u);
                    grew = true;
                }
            }
        }
    }
    return dt;
}

/// Separation over original nodes in a magnified graph, conditioning on Dt(z).
inline bool is_separated_magnified(const Magnified& m, NodeSet x, NodeSet y, NodeSet z,
                                   Criterion criterion = Criterion::route) {
    if (!(x | y | z).subset_of(m.original)) throw InputError("query must use original nodes");
    return is_separated(m.graph, x, y, determined_closure(m, z), criterion);
}

} // namespace admg

#endif // ADMG_SEPARATION_HPP
