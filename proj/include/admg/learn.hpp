#ifndef ADMG_LEARN_HPP
#define ADMG_LEARN_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "admg/dsl.hpp"
#include "admg/error.hpp"
#include "admg/graph.hpp"
#include "admg/separation.hpp"
#include "admg/surgery.hpp"

namespace admg {

/// regime < 0 is observational, otherwise the intervened node.
struct Fact {
    bool dep = true;
    int x = 0;
    int y = 0;
    NodeSet cond;
    int regime = -1;
    long weight = 1;

    bool operator==(const Fact&) const = default;
    auto operator<=>(const Fact&) const = default;
};

struct FactSet {
    int n = 0;
    std::vector<Fact> facts;
    std::vector<std::string> repairs; // notes about input lines that were fixed up

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        for (int i = 1; i <= n; ++i) out.push_back(std::to_string(i));
        return out;
    }

    FactSet observational() const {
        FactSet out{n, {}, repairs};
        for (const auto& f : facts)
            if (f.regime < 0) out.facts.push_back(f);
        return out;
    }
};

enum class Subfamily { admg, oadmg, aadmg, amp_cg, mvr_cg, dag, ug, bg };

inline const std::vector<std::pair<Subfamily, std::string>>& subfamily_names() {
    static const std::vector<std::pair<Subfamily, std::string>> names = {
        {Subfamily::admg, "admg"},     {Subfamily::oadmg, "oadmg"}, {Subfamily::aadmg, "aadmg"},
        {Subfamily::amp_cg, "amp-cg"}, {Subfamily::mvr_cg, "mvr-cg"}, {Subfamily::dag, "dag"},
        {Subfamily::ug, "ug"},         {Subfamily::bg, "bg"}};
    return names;
}

inline std::string to_string(Subfamily f) {
    for (const auto& [k, v] : subfamily_names())
        if (k == f) return v;
    return "?";
}

inline Subfamily parse_subfamily(const std::string& s) {
    for (const auto& [k, v] : subfamily_names())
        if (v == s) return k;
    throw ConfigurationError("unknown graph family '" + s + "'");
}

struct LearnConfig {
    Subfamily family = Subfamily::admg;
    long line_penalty = 1;
    long arrow_penalty = 1;
    long biarrow_penalty = 1;
    int threads = 1;
};

struct LearnResult {
    long penalty = 0;
    std::vector<Admg> graphs;
    long scored = 0;
};

inline constexpr int kMaxLearnNodes = 6;

// ---------------------------------------------------------------------------
// Facts I/O

namespace detail {

inline void check_fact(const Fact& f, int n, int line) {
    auto in_range = [&](int v) { return v >= 0 && v < n; };
    if (!in_range(f.x) || !in_range(f.y)) throw ParseError("node out of range", line);
    if (f.x == f.y) throw ParseError("a fact needs two different nodes", line);
    if (!f.cond.subset_of(NodeSet::full(n))) throw ParseError("conditioning set references a node beyond " + std::to_string(n), line);
    if (f.cond.contains(f.x) || f.cond.contains(f.y)) throw ParseError("conditioning set contains an endpoint", line);
    if (f.regime >= n) throw ParseError("intervened node out of range", line);
    if (f.weight <= 0) throw ParseError("weight must be positive", line);
}

inline long parse_long(const std::string& s, int line) {
    try {
        std::size_t used = 0;
        long v = std::stol(s, &used);
        if (used != s.size()) throw ParseError("expected an integer, got '" + s + "'", line);
        return v;
    } catch (const std::logic_error&) {
        throw ParseError("expected an integer, got '" + s + "'", line);
    }
}

} // namespace detail

/// Reads facts in the native syntax
///   nodes 3
///   dep 1 2 {3} obs 1
///   indep 2 3 {} do=3 1
/// or the bitmask predicates dep(X,Y,C,I,W). with node i as bit 2^(i-1) and
/// I = 0 for observations. ASP rule lines are skipped.
inline FactSet parse_facts(std::string_view text) {
    static const std::regex native(R"(^(dep|indep)\s+(\S+)\s+(\S+)\s+\{([^}]*)\}\s+(obs|do=(\S+))\s+(\S+)$)");
    static const std::regex asp(R"(^(dep|indep)\(([^)]*)\)\.$)");
    static const std::regex nodes_native(R"(^nodes\s+(\d+)$)");
    static const std::regex nodes_asp(R"(^nodes\((\d+)\)\.$)");
    FactSet out;
    out.n = -1;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    auto node = [&](const std::string& s) {
        long v = detail::parse_long(s, line_no);
        if (out.n < 0) throw ParseError("facts appear before the nodes header", line_no);
        if (v < 1 || v > out.n) throw ParseError("node " + s + " out of range 1.." + std::to_string(out.n), line_no);
        return static_cast<int>(v - 1);
    };
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        for (char c : {'%', '#'}) {
            if (line.rfind("#show", 0) == 0) break;
            if (auto p = line.find(c); p != std::string::npos) line = line.substr(0, p);
        }
        line = std::string(detail::trim(line));
        if (line.empty()) continue;
        std::smatch m;
        if (std::regex_match(line, m, nodes_native) || std::regex_match(line, m, nodes_asp)) {
            const long n = detail::parse_long(m[1], line_no);
            if (n < 1 || n > kMaxNodes) throw ParseError("bad node count", line_no);
            out.n = static_cast<int>(n);
            continue;
        }
        if (line.rfind("set(", 0) == 0 || line.find(":-") != std::string::npos ||
            line.find(":~") != std::string::npos || line.rfind("#show", 0) == 0 || line.rfind("{", 0) == 0) {
            continue;
        }
        Fact f;
        if (std::regex_match(line, m, native)) {
            f.dep = m[1] == "dep";
            f.x = node(m[2]);
            f.y = node(m[3]);
            std::string members = m[4];
            std::replace(members.begin(), members.end(), ',', ' ');
            for (const auto& tok : detail::split_ws(members)) f.cond.insert(node(tok));
            f.regime = m[5] == "obs" ? -1 : node(m[6]);
            f.weight = detail::parse_long(m[7], line_no);
        } else if (std::regex_match(line, m, asp)) {
            if (out.n < 0) throw ParseError("facts appear before the nodes header", line_no);
            std::vector<long> args;
            std::string body = m[2];
            std::replace(body.begin(), body.end(), ',', ' ');
            for (const auto& tok : detail::split_ws(body)) args.push_back(detail::parse_long(tok, line_no));
            if (args.size() == 6 && args[3] == 0) {
                out.repairs.push_back("line " + std::to_string(line_no) + ": dropped the extra 0 in '" + line + "'");
                args.erase(args.begin() + 3);
            }
            if (args.size() != 5) throw ParseError("expected 5 arguments in '" + line + "'", line_no);
            f.dep = m[1] == "dep";
            f.x = node(std::to_string(args[0]));
            f.y = node(std::to_string(args[1]));
            if (args[2] < 0 || args[2] >= (1L << out.n)) {
                throw ParseError("set index " + std::to_string(args[2]) + " references a node beyond " + std::to_string(out.n), line_no);
            }
            f.cond = NodeSet(static_cast<std::uint64_t>(args[2]));
            f.regime = args[3] == 0 ? -1 : node(std::to_string(args[3]));
            f.weight = args[4];
        } else {
            throw ParseError("unrecognized fact '" + line + "'", line_no);
        }
        detail::check_fact(f, out.n, line_no);
        out.facts.push_back(f);
    }
    if (out.n < 0) throw ParseError("missing nodes header", line_no);
    return out;
}

inline std::string format_fact_native(const Fact& f) {
    std::string s = std::string(f.dep ? "dep" : "indep") + " " + std::to_string(f.x + 1) + " " + std::to_string(f.y + 1) + " {";
    bool first = true;
    for (int v : f.cond) {
        s += (first ? "" : ",") + std::to_string(v + 1);
        first = false;
    }
    s += "} " + (f.regime < 0 ? std::string("obs") : "do=" + std::to_string(f.regime + 1));
    return s + " " + std::to_string(f.weight);
}

inline std::string format_fact_asp(const Fact& f) {
    return std::string(f.dep ? "dep" : "indep") + "(" + std::to_string(f.x + 1) + "," + std::to_string(f.y + 1) + "," +
           std::to_string(f.cond.bits()) + "," + std::to_string(f.regime + 1) + "," + std::to_string(f.weight) + ").";
}

inline std::string serialize_facts(const FactSet& fs) {
    std::string s = "nodes " + std::to_string(fs.n) + "\n";
    for (const auto& f : fs.facts) s += format_fact_native(f) + "\n";
    return s;
}

// ---------------------------------------------------------------------------
// Graph space

/// Per unordered pair (i < j): code % 3 is the arrow (0 none, 1 i->j, 2 j->i),
/// (code / 3) % 2 the line and code / 6 the biarrow.
inline std::vector<std::pair<int, int>> node_pairs(int n) {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) out.emplace_back(i, j);
    return out;
}

namespace detail {

inline bool pair_allowed(int code, Subfamily f) {
    const int dir = code % 3, line = (code / 3) % 2, bi = code / 6;
    switch (f) {
    case Subfamily::admg: return true;
    case Subfamily::oadmg: return !line;
    case Subfamily::aadmg: return !bi;
    case Subfamily::amp_cg: return !bi && !(line && dir);
    case Subfamily::mvr_cg: return !line && !(bi && dir);
    case Subfamily::dag: return !line && !bi;
    case Subfamily::ug: return !dir && !bi;
    case Subfamily::bg: return !dir && !line;
    }
    return true;
}

/// Chain-graph condition: no arrow X -> Y with X reachable from Y through
/// arrows and the family's symmetric edges.
inline bool no_semidirected_cycle(const Admg& g, bool via_lines) {
    for (auto [a, b] : g.directed_edges()) {
        NodeSet seen = NodeSet::single(b);
        std::vector<int> stack{b};
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            NodeSet next = g.children(v) | (via_lines ? g.neighbors(v) : g.spouses(v));
            for (int u : next - seen) {
                if (u == a) return false;
                seen.insert(u);
                stack.push_back(u);
            }
        }
    }
    return true;
}

inline int pair_code(const Admg& g, int i, int j) {
    int dir = g.has_directed(i, j) ? 1 : g.has_directed(j, i) ? 2 : 0;
    return dir + 3 * g.has_undirected(i, j) + 6 * g.has_bidirected(i, j);
}

inline void apply_code(Admg& g, int i, int j, int code) {
    const int dir = code % 3;
    if (dir == 1) g.add_directed(i, j);
    if (dir == 2) g.add_directed(j, i);
    if ((code / 3) % 2) g.add_undirected(i, j);
    if (code / 6) g.add_bidirected(i, j);
}

} // namespace detail

inline bool in_family(const Admg& g, Subfamily f) {
    const auto nodes = g.nodes().to_vector();
    for (std::size_t a = 0; a < nodes.size(); ++a)
        for (std::size_t b = a + 1; b < nodes.size(); ++b)
            if (!detail::pair_allowed(detail::pair_code(g, nodes[a], nodes[b]), f)) return false;
    if (f == Subfamily::amp_cg) return detail::no_semidirected_cycle(g, true);
    if (f == Subfamily::mvr_cg) return detail::no_semidirected_cycle(g, false);
    return true;
}

/// Codes of every pair, used as the canonical sort key.
inline std::vector<int> canonical_key(const Admg& g) {
    std::vector<int> key;
    for (auto [i, j] : node_pairs(g.universe())) key.push_back(detail::pair_code(g, i, j));
    return key;
}

inline void sort_canonically(std::vector<Admg>& graphs) {
    std::stable_sort(graphs.begin(), graphs.end(),
                     [](const Admg& a, const Admg& b) { return canonical_key(a) < canonical_key(b); });
}

/// Every acyclic graph on nodes 1..n of the given family.
inline void enumerate_graphs(int n, Subfamily family, const std::function<void(const Admg&)>& visit) {
    if (n < 1 || n > kMaxLearnNodes) {
        throw ConfigurationError("exhaustive enumeration supports 1 to " + std::to_string(kMaxLearnNodes) + " nodes, got " +
                                 std::to_string(n));
    }
    std::vector<std::string> labels;
    for (int i = 1; i <= n; ++i) labels.push_back(std::to_string(i));
    const auto pairs = node_pairs(n);
    std::function<void(std::size_t, const Admg&)> rec = [&](std::size_t k, const Admg& g) {
        if (k == pairs.size()) {
            if (in_family(g, family)) visit(g);
            return;
        }
        auto [i, j] = pairs[k];
        for (int code = 0; code < 12; ++code) {
            if (!detail::pair_allowed(code, family)) continue;
            const int dir = code % 3;
            if (dir == 1 && g.descendants_of(NodeSet::single(j)).contains(i)) continue;
            if (dir == 2 && g.descendants_of(NodeSet::single(i)).contains(j)) continue;
            Admg next = g;
            detail::apply_code(next, i, j, code);
            rec(k + 1, next);
        }
    };
    rec(0, Admg(labels));
}

inline std::vector<Admg> enumerate_graphs(int n, Subfamily family) {
    std::vector<Admg> out;
    enumerate_graphs(n, family, [&](const Admg& g) { out.push_back(g); });
    return out;
}

/// The graph a regime sees: g itself, or g after intervening on the node.
inline Admg regime_graph(const Admg& g, int regime) {
    if (regime < 0) return g;
    return intervene(g, NodeSet::single(regime));
}

// ---------------------------------------------------------------------------
// Scoring and search

inline long edge_penalty(const Admg& g, const LearnConfig& cfg) {
    return cfg.line_penalty * static_cast<long>(g.undirected_edges().size()) +
           cfg.arrow_penalty * static_cast<long>(g.directed_edges().size()) +
           cfg.biarrow_penalty * static_cast<long>(g.bidirected_edges().size());
}

namespace detail {

/// Weight of violated independences, or nullopt when a dependence is missing.
inline std::optional<long> fact_penalty(const Admg& g, const FactSet& facts, bool deps_too) {
    std::map<int, Admg> regimes;
    long total = 0;
    for (const auto& f : facts.facts) {
        if (f.dep && !deps_too) continue;
        auto it = regimes.find(f.regime);
        if (it == regimes.end()) it = regimes.emplace(f.regime, regime_graph(g, f.regime)).first;
        const bool con = connects_by_route(it->second, f.x, f.y, f.cond);
        if (f.dep && !con) return std::nullopt;
        if (!f.dep && con) total += f.weight;
    }
    return total;
}

} // namespace detail

/// Total penalty of g, or nullopt if some dependence fact is not represented.
inline std::optional<long> score(const Admg& g, const FactSet& facts, const LearnConfig& cfg = {}) {
    auto p = detail::fact_penalty(g, facts, true);
    if (!p) return std::nullopt;
    return *p + edge_penalty(g, cfg);
}

/// Exact search. Connections only grow when edges are added, so violated
/// independences found on a partial graph stay violated; the search deepens
/// the admissible penalty one unit at a time and stops at the first level
/// holding a feasible graph.
inline LearnResult learn(const FactSet& facts, const LearnConfig& cfg = {}) {
    const int n = facts.n;
    if (n < 1 || n > kMaxLearnNodes) {
        throw ConfigurationError("learning supports 1 to " + std::to_string(kMaxLearnNodes) + " nodes, got " + std::to_string(n));
    }
    if (cfg.line_penalty < 0 || cfg.arrow_penalty < 0 || cfg.biarrow_penalty < 0) {
        throw ConfigurationError("penalties must be nonnegative");
    }
    const auto pairs = node_pairs(n);
    const auto labels = facts.labels();
    long max_pen = 0;
    for (const auto& f : facts.facts)
        if (!f.dep) max_pen += f.weight;
    max_pen += static_cast<long>(pairs.size()) * (2 * cfg.line_penalty + cfg.arrow_penalty + cfg.biarrow_penalty);

    auto code_cost = [&](int code) {
        return (code % 3 ? cfg.arrow_penalty : 0) + ((code / 3) % 2 ? cfg.line_penalty : 0) +
               (code / 6 ? cfg.biarrow_penalty : 0);
    };

    struct Worker {
        std::vector<Admg> found;
        long scored = 0;
    };

    auto search_level = [&](long bound, const std::vector<int>& first_codes, Worker& w) {
        std::function<void(std::size_t, const Admg&, long)> rec = [&](std::size_t k, const Admg& g, long edges) {
            if (k == pairs.size()) {
                if (!in_family(g, cfg.family)) return;
                ++w.scored;
                auto p = detail::fact_penalty(g, facts, true);
                if (p && *p + edges == bound) w.found.push_back(g);
                return;
            }
            if (k > 0 && k % 2 == 0) {
                auto partial = detail::fact_penalty(g, facts, false);
                if (*partial + edges > bound) return;
            }
            auto [i, j] = pairs[k];
            const auto& codes = k == 0 ? first_codes : std::vector<int>{};
            for (int code = 0; code < 12; ++code) {
                if (k == 0 && std::find(codes.begin(), codes.end(), code) == codes.end()) continue;
                if (!detail::pair_allowed(code, cfg.family)) continue;
                const long e = edges + code_cost(code);
                if (e > bound) continue;
                const int dir = code % 3;
                if (dir == 1 && g.descendants_of(NodeSet::single(j)).contains(i)) continue;
                if (dir == 2 && g.descendants_of(NodeSet::single(i)).contains(j)) continue;
                Admg next = g;
                detail::apply_code(next, i, j, code);
                rec(k + 1, next, e);
            }
        };
        rec(0, Admg(labels), 0);
    };

    LearnResult result;
    const int threads = std::max(1, cfg.threads);
    for (long bound = 0; bound <= max_pen; ++bound) {
        std::vector<Worker> workers(threads);
        std::vector<std::vector<int>> shares(threads);
        for (int code = 0; code < 12; ++code) shares[code % threads].push_back(code);
        if (pairs.empty()) {
            Admg g(labels);
            ++result.scored;
            auto p = score(g, facts, cfg);
            if (p && *p == bound) workers[0].found.push_back(g);
        } else if (threads == 1) {
            search_level(bound, shares[0], workers[0]);
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < threads; ++t)
                pool.emplace_back([&, t] { search_level(bound, shares[t], workers[t]); });
            for (auto& th : pool) th.join();
        }
        for (auto& w : workers) {
            result.scored += w.scored;
            for (auto& g : w.found) result.graphs.push_back(std::move(g));
        }
        if (!result.graphs.empty()) {
            result.penalty = bound;
            sort_canonically(result.graphs);
            return result;
        }
    }
    throw InfeasibleError("no " + to_string(cfg.family) + " graph represents every dependence fact");
}

// ---------------------------------------------------------------------------
// ASP text and graph-derived facts

inline const char* asp_program() {
    return R"(node(X) :- nodes(N), X=1..N.

{ line(X,Y,0) } :- node(X), node(Y), X != Y.
{ arrow(X,Y,0) } :- node(X), node(Y), X != Y.
{ biarrow(X,Y,0) } :- node(X), node(Y), X != Y.
line(X,Y,I) :- line(X,Y,0), node(I), X != I, Y != I, I > 0.
line(X,Y,I) :- line(X,I,0), line(I,Y,0), node(I), X != Y, I > 0.
arrow(X,Y,I) :- arrow(X,Y,0), node(I), Y != I, I > 0.
biarrow(X,Y,I) :- biarrow(X,Y,0), node(I), X != I, Y != I, I > 0.
line(X,Y,I) :- line(Y,X,I).
:- arrow(X,Y,I), arrow(Y,X,I).
biarrow(X,Y,I) :- biarrow(Y,X,I).

ancestor(X,Y) :- arrow(X,Y,0).
ancestor(X,Y) :- ancestor(X,Z), ancestor(Z,Y).
:- ancestor(X,Y), arrow(Y,X,0).

inside_set(X,C) :- node(X), set(C), 2**(X-1) & C != 0.
outside_set(X,C) :- node(X), set(C), 2**(X-1) & C = 0.


end_line(X,Y,C,I) :- line(X,Y,I), outside_set(X,C).
end_head(X,Y,C,I) :- arrow(X,Y,I), outside_set(X,C).
end_head(X,Y,C,I) :- biarrow(X,Y,I), outside_set(X,C).
end_tail(X,Y,C,I) :- arrow(Y,X,I), outside_set(X,C).

end_line(X,Y,C,I) :- end_line(X,Z,C,I), line(Z,Y,I), outside_set(Z,C).
end_line(X,Y,C,I) :- end_line(X,Z,C,I), line(Z,Y,I), biarrow(Z,W,I).
end_line(X,Y,C,I) :- end_tail(X,Z,C,I), line(Z,Y,I), outside_set(Z,C).
end_head(X,Y,C,I) :- end_line(X,Z,C,I), arrow(Z,Y,I), outside_set(Z,C).
end_head(X,Y,C,I) :- end_head(X,Z,C,I), arrow(Z,Y,I), outside_set(Z,C).
end_head(X,Y,C,I) :- end_tail(X,Z,C,I), arrow(Z,Y,I), outside_set(Z,C).
end_head(X,Y,C,I) :- end_tail(X,Z,C,I), biarrow(Z,Y,I), outside_set(Z,C).
end_tail(X,Y,C,I) :- end_tail(X,Z,C,I), arrow(Y,Z,I), outside_set(Z,C).

end_line(X,Y,C,I) :- end_head(X,Z,C,I), line(Z,Y,I), inside_set(Z,C).
end_head(X,Y,C,I) :- end_line(X,Z,C,I), biarrow(Z,Y,I), inside_set(Z,C).
end_head(X,Y,C,I) :- end_head(X,Z,C,I), biarrow(Z,Y,I), inside_set(Z,C).
end_tail(X,Y,C,I) :- end_line(X,Z,C,I), arrow(Y,Z,I), inside_set(Z,C).
end_tail(X,Y,C,I) :- end_head(X,Z,C,I), arrow(Y,Z,I), inside_set(Z,C).

con(X,Y,C,I) :- end_line(X,Y,C,I), X != Y, outside_set(Y,C).
con(X,Y,C,I) :- end_head(X,Y,C,I), X != Y, outside_set(Y,C).
con(X,Y,C,I) :- end_tail(X,Y,C,I), X != Y, outside_set(Y,C).
con(X,Y,C,I) :- con(Y,X,C,I).

:- dep(X,Y,C,I,W), not con(X,Y,C,I).

:~ indep(X,Y,C,I,W), con(X,Y,C,I). [W,X,Y,C,I]

:~ line(X,Y,0), X < Y. [1,X,Y,1]
:~ arrow(X,Y,0). [1,X,Y,2]
:~ biarrow(X,Y,0), X < Y. [1,X,Y,3]

#show.
#show line(X,Y) : line(X,Y,0), X < Y.
#show arrow(X,Y) : arrow(X,Y,0).
#show biarrow(X,Y) : biarrow(X,Y,0), X < Y.
)";
}

/// The learning program followed by family constraints and the facts.
inline std::string emit_asp(const FactSet& facts, const LearnConfig& cfg = {}) {
    std::string program = asp_program();
    auto set_weight = [&](const std::string& tag, long w) {
        auto pos = program.find(tag);
        if (pos != std::string::npos) program.replace(pos, 2, "[" + std::to_string(w));
    };
    set_weight("[1,X,Y,1]", cfg.line_penalty);
    set_weight("[1,X,Y,2]", cfg.arrow_penalty);
    set_weight("[1,X,Y,3]", cfg.biarrow_penalty);
    std::string out = program;
    switch (cfg.family) {
    case Subfamily::admg: break;
    case Subfamily::oadmg: out += "\n:- line(X,Y,0).\n"; break;
    case Subfamily::aadmg: out += "\n:- biarrow(X,Y,0).\n"; break;
    case Subfamily::dag: out += "\n:- line(X,Y,0).\n:- biarrow(X,Y,0).\n"; break;
    case Subfamily::ug: out += "\n:- arrow(X,Y,0).\n:- biarrow(X,Y,0).\n"; break;
    case Subfamily::bg: out += "\n:- arrow(X,Y,0).\n:- line(X,Y,0).\n"; break;
    case Subfamily::amp_cg:
        out += "\n:- biarrow(X,Y,0).\n:- line(X,Y,0), arrow(X,Y,0).\nancestor(X,Y) :- line(X,Y,0).\n";
        break;
    case Subfamily::mvr_cg:
        out += "\n:- line(X,Y,0).\n:- biarrow(X,Y,0), arrow(X,Y,0).\nancestor(X,Y) :- biarrow(X,Y,0).\n";
        break;
    }
    out += "\nnodes(" + std::to_string(facts.n) + ").\nset(0.." + std::to_string((1L << facts.n) - 1) + ").\n\n";
    for (const auto& f : facts.facts) out += format_fact_asp(f) + "\n";
    return out;
}

/// Facts read off the graph: for each regime (observational, then one per
/// node when `interventions`), each pair and each conditioning set, dep when
/// the pair is connected and indep otherwise.
inline FactSet sep_oracle(const Admg& g, bool interventions = true) {
    const Admg c = g.compacted();
    FactSet out;
    out.n = c.universe();
    std::vector<int> regimes{-1};
    if (interventions)
        for (int i = 0; i < out.n; ++i) regimes.push_back(i);
    for (int r : regimes) {
        const Admg h = regime_graph(c, r);
        for (auto [x, y] : node_pairs(out.n)) {
            const NodeSet rest = c.nodes().without(x).without(y);
            for (NodeSet z : subsets_by_size(rest)) {
                Fact f;
                f.x = x;
                f.y = y;
                f.cond = z;
                f.regime = r;
                f.dep = connects_by_route(h, x, y, z);
                out.facts.push_back(f);
            }
        }
    }
    return out;
}

} // namespace admg

#endif // ADMG_LEARN_HPP
