#ifndef ADMG_DSL_HPP
#define ADMG_DSL_HPP

// Text format for graphs:
//
//   # comment
//   nodes A B C
//   A -> B
//   A -- C
//   B <-> C

#include <algorithm>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "admg/error.hpp"
#include "admg/graph.hpp"

namespace admg {

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline bool valid_label(std::string_view s) {
    if (s.empty()) return false;
    return std::none_of(s.begin(), s.end(), [](char c) {
        return c == ' ' || c == '\t' || c == '-' || c == '<' || c == '>' || c == '#' ||
               c == ',' || c == '{' || c == '}' || c == '"';
    });
}

} // namespace detail

inline Admg parse_graph(std::string_view text) {
    std::optional<Admg> g;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        if (!g) {
            auto toks = detail::split_ws(line);
            if (toks.empty() || toks[0] != "nodes") {
                throw ParseError("expected header 'nodes <label>+'", line_no);
            }
            toks.erase(toks.begin());
            for (const auto& t : toks) {
                if (!detail::valid_label(t)) throw ParseError("invalid node label '" + t + "'", line_no);
            }
            try {
                g.emplace(std::move(toks));
            } catch (const InputError& e) {
                throw ParseError(e.what(), line_no);
            }
            continue;
        }

        EdgeKind kind;
        std::size_t pos;
        std::size_t len;
        if ((pos = line.find("<->")) != std::string_view::npos) {
            kind = EdgeKind::bidirected;
            len = 3;
        } else if ((pos = line.find("->")) != std::string_view::npos) {
            kind = EdgeKind::directed;
            len = 2;
        } else if ((pos = line.find("--")) != std::string_view::npos) {
            kind = EdgeKind::undirected;
            len = 2;
        } else {
            throw ParseError("expected an edge 'A -> B', 'A -- B' or 'A <-> B'", line_no);
        }
        auto lhs = detail::trim(line.substr(0, pos));
        auto rhs = detail::trim(line.substr(pos + len));
        if (!detail::valid_label(lhs) || !detail::valid_label(rhs)) {
            throw ParseError("malformed edge '" + std::string(line) + "'", line_no);
        }
        auto a = g->find(lhs);
        auto b = g->find(rhs);
        if (!a) throw ParseError("unknown node '" + std::string(lhs) + "'", line_no);
        if (!b) throw ParseError("unknown node '" + std::string(rhs) + "'", line_no);
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (*a == *b) throw GraphError(where + "self-loop on node " + std::string(lhs));
        if (g->has_edge(kind, *a, *b)) {
            throw GraphError(where + "duplicate edge '" + std::string(line) + "'");
        }
        if (kind == EdgeKind::directed && g->descendants_of(NodeSet::single(*b)).contains(*a)) {
            throw GraphError(where + "edge '" + std::string(line) + "' creates a directed cycle");
        }
        g->add_edge(kind, *a, *b);
    }
    if (!g) throw ParseError("missing 'nodes' header", line_no);
    return *g;
}

/// Canonical text: nodes sorted by label, then one edge per line sorted
/// lexicographically; undirected and bidirected pairs list the smaller label first.
inline std::string serialize_graph(const Admg& g) {
    std::vector<std::string> names;
    for (int v : g.nodes()) names.push_back(g.label(v));
    std::sort(names.begin(), names.end());

    std::vector<std::string> edges;
    auto ordered = [&](int a, int b) {
        return g.label(a) < g.label(b) ? std::pair{a, b} : std::pair{b, a};
    };
    for (auto [a, b] : g.directed_edges()) edges.push_back(g.label(a) + " -> " + g.label(b));
    for (auto [a, b] : g.undirected_edges()) {
        auto [x, y] = ordered(a, b);
        edges.push_back(g.label(x) + " -- " + g.label(y));
    }
    for (auto [a, b] : g.bidirected_edges()) {
        auto [x, y] = ordered(a, b);
        edges.push_back(g.label(x) + " <-> " + g.label(y));
    }
    std::sort(edges.begin(), edges.end());

    std::string out = "nodes";
    for (const auto& n : names) out += " " + n;
    out += "\n";
    for (const auto& e : edges) out += e + "\n";
    return out;
}

} // namespace admg

#endif // ADMG_DSL_HPP
