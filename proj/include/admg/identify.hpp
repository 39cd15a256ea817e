#ifndef ADMG_IDENTIFY_HPP
#define ADMG_IDENTIFY_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "admg/error.hpp"
#include "admg/estimand.hpp"
#include "admg/graph.hpp"
#include "admg/separation.hpp"
#include "admg/surgery.hpp"

namespace admg {

enum class Rule { one = 1, two = 2, three = 3 };
enum class RuleForm { intervened, simplified };

enum class Verdict { identified, not_identified, undecided };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::identified: return "identified";
    case Verdict::not_identified: return "not identified";
    case Verdict::undecided: return "undecided";
    }
    return "";
}

/// p(y | do(x), given). `ancestral` pins the observed ancestral set used by
/// the decomposition criteria.
struct EffectQuery {
    NodeSet y;
    NodeSet x;
    NodeSet given;
    std::optional<NodeSet> ancestral;
};

struct IdentificationResult {
    Verdict verdict = Verdict::undecided;
    std::string criterion;
    ExprPtr estimand;
    std::vector<Definition> definitions;
    std::optional<Witness> witness;
    std::vector<std::string> derivation;
    std::string note;

    bool identified() const { return verdict == Verdict::identified; }

    std::string render(const Admg& g) const {
        std::string out = to_string(verdict);
        if (!criterion.empty()) out += " (" + criterion + ")";
        if (verdict == Verdict::identified) {
            out += ": ";
            for (const auto& d : definitions) out += admg::render(d, g.labels()) + "; ";
            out += admg::render(estimand, g.labels());
        } else if (witness) {
            out += ": witness " + witness->render(g);
        }
        return out;
    }
};

/// Nodes of s ordered by label.
inline std::vector<int> by_label(const Admg& g, NodeSet s) {
    auto v = s.to_vector();
    std::sort(v.begin(), v.end(), [&](int a, int b) { return g.label(a) < g.label(b); });
    return v;
}

inline std::vector<int> concat(std::initializer_list<std::vector<int>> parts) {
    std::vector<int> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

/// "p(B|do(A),C)"
inline std::string format_query(const Admg& g, NodeSet y, NodeSet x, NodeSet w) {
    std::string s = "p(";
    auto names = [&](NodeSet set) {
        std::string t;
        for (int v : by_label(g, set)) t += (t.empty() ? "" : ",") + g.label(v);
        return t;
    };
    s += names(y);
    std::string cond;
    if (!x.empty()) cond = "do(" + names(x) + ")";
    if (!w.empty()) cond += (cond.empty() ? "" : ",") + names(w);
    if (!cond.empty()) s += "|" + cond;
    return s + ")";
}

// ---------------------------------------------------------------------------
// Calculus

namespace detail {

inline bool sep_or_empty(const Admg& g, NodeSet y, NodeSet z, NodeSet cond) {
    if (y.empty() || z.empty()) return true;
    return is_separated(g, y, z, cond);
}

} // namespace detail

/// Antecedent of a calculus rule for p(y | do(x), do(z)/z, w).
inline bool rule_applies(const Admg& g, Rule rule, NodeSet x, NodeSet y, NodeSet z, NodeSet w,
                         RuleForm form = RuleForm::intervened) {
    for (NodeSet s : {x, y, z, w}) g.require_subset(s);
    if (x.intersects(y) || x.intersects(z) || x.intersects(w) || y.intersects(z) || y.intersects(w) ||
        z.intersects(w)) {
        throw InputError("rule sets must be pairwise disjoint");
    }
    if (y.empty() || z.empty()) return true;
    Admg base;
    NodeSet cond;
    if (form == RuleForm::intervened) {
        base = intervene(g, x);
        cond = x | w;
    } else {
        EdgeFilterSpec cut;
        cut.delete_directed_into = x;
        cut.delete_directed_out_of = x;
        cut.delete_bidirected_into = x;
        base = delete_edges(g, cut);
        cond = w;
    }
    switch (rule) {
    case Rule::one: break;
    case Rule::two: {
        EdgeFilterSpec spec;
        spec.delete_directed_out_of = z;
        base = delete_edges(base, spec);
        break;
    }
    case Rule::three: base = intervene(base, non_ancestors_of(base, z, w)); break;
    }
    return detail::sep_or_empty(base, y, z, cond);
}

// ---------------------------------------------------------------------------
// Back-door and front-door

namespace detail {

inline bool is_directed_path(const Witness& w) {
    return std::all_of(w.links.begin(), w.links.end(), [](Link l) { return l == Link::forward; });
}

/// First unblocked non-directed path from a node of `from` to `to` given `cond`.
inline std::optional<Witness> open_non_directed_path(const Admg& g, NodeSet from, NodeSet to, NodeSet cond) {
    for (int a : from) {
        for (int b : to) {
            if (auto w = connects_by_path(g, a, b, cond, [](const Witness& p) { return !is_directed_path(p); })) {
                return w;
            }
        }
    }
    return std::nullopt;
}

/// True when every directed path from x to y meets z.
inline bool blocks_directed_paths(const Admg& g, int x, NodeSet y, NodeSet z) {
    Admg cut = g;
    for (int v : z) {
        for (int c : g.children(v)) cut.remove_directed(v, c);
        for (int p : g.parents(v)) cut.remove_directed(p, v);
    }
    return !cut.descendants_of(NodeSet::single(x)).without(x).intersects(y);
}

} // namespace detail

struct CriterionCheck {
    bool ok = false;
    std::string reason;
    std::optional<Witness> witness;
};

/// Back-door conditions for (from, y) with adjustment set `cond`.
inline CriterionCheck check_backdoor(const Admg& g, NodeSet from, NodeSet y, NodeSet cond) {
    if (cond.intersects(g.descendants_of(from))) return {false, "adjustment set contains a descendant", {}};
    if (auto w = detail::open_non_directed_path(g, from, y, cond)) return {false, "open non-directed path", w};
    return {true, {}, {}};
}

/// sum_z p(y|x,w,z) p(z|w) when w and z satisfy the back-door criterion.
inline std::optional<ExprPtr> backdoor(const Admg& g, int x, NodeSet y, NodeSet w, NodeSet z) {
    if (y.contains(x) || w.contains(x) || z.contains(x) || y.intersects(w | z) || w.intersects(z)) {
        throw InputError("back-door sets must be disjoint");
    }
    if (!check_backdoor(g, NodeSet::single(x), y, w | z).ok) return std::nullopt;
    const auto ws = by_label(g, w);
    const auto zs = by_label(g, z);
    ExprPtr e = prob(by_label(g, y), concat({{x}, ws, zs}));
    if (z.empty()) return e;
    return marginalize(product({e, prob(zs, ws)}), zs);
}

inline CriterionCheck check_frontdoor(const Admg& g, int x, NodeSet y, NodeSet w, NodeSet z) {
    const NodeSet xs = NodeSet::single(x);
    if (w.intersects(g.descendants_of(xs))) return {false, "conditioning set contains a descendant", {}};
    if (!detail::blocks_directed_paths(g, x, y, z)) return {false, "a directed path avoids the mediators", {}};
    if (!z.empty()) {
        auto c3 = check_backdoor(g, xs, z, w);
        if (!c3.ok) return c3;
        auto c4 = check_backdoor(g, z, y, w | xs);
        if (!c4.ok) return c4;
    }
    return {true, {}, {}};
}

/// sum_z p(z|x,w) sum_x' p(y|z,w,x') p(x'|w) when the front-door conditions hold.
inline std::optional<ExprPtr> frontdoor(const Admg& g, int x, NodeSet y, NodeSet w, NodeSet z) {
    if (y.contains(x) || w.contains(x) || z.contains(x) || y.intersects(w | z) || w.intersects(z)) {
        throw InputError("front-door sets must be disjoint");
    }
    if (!check_frontdoor(g, x, y, w, z).ok) return std::nullopt;
    const auto ws = by_label(g, w);
    const auto zs = by_label(g, z);
    ExprPtr inner = marginalize(product({prob(by_label(g, y), concat({zs, ws, {x}})), prob({x}, ws)}), x);
    if (z.empty()) return inner;
    return marginalize(product({prob(zs, concat({{x}, ws})), inner}), zs);
}

/// sum_w inner(w) p(w) for p(y | do(x)) from p(y | do(x), w); requires w to
/// hold no descendant of x.
inline std::optional<ExprPtr> marginalize_context(const Admg& g, const ExprPtr& inner, NodeSet x, NodeSet w) {
    if (w.intersects(g.descendants_of(x))) return std::nullopt;
    if (w.empty()) return inner;
    const auto ws = by_label(g, w);
    return marginalize(product({prob(ws), inner}), ws);
}

// ---------------------------------------------------------------------------
// Decomposition

/// Q(s | context) = prod over v in s of dist(v | earlier nodes of `scope`, context),
/// earlier meaning the canonical topological order of scope.
inline ExprPtr q_factor(const Admg& g, NodeSet scope, NodeSet s, const std::vector<int>& context,
                        const std::string& dist = "p") {
    if (!s.subset_of(scope)) throw InputError("component outside its scope");
    std::vector<ExprPtr> terms;
    std::vector<int> before;
    for (int v : topological_order(g, scope)) {
        if (s.contains(v)) terms.push_back(prob({v}, concat({before, context}), dist));
        before.push_back(v);
    }
    return product(terms);
}

/// Q(s | W') with W = V \ W' ordered topologically.
inline ExprPtr q_factor(const Admg& g, NodeSet w_prime, NodeSet s) {
    if (!is_ancestral(g, w_prime)) throw InputError("W' must be ancestral");
    return q_factor(g, g.nodes() - w_prime, s, by_label(g, w_prime));
}

namespace detail {

/// Undirected path inside g from x to some node of `targets`.
inline std::optional<Witness> line_path(const Admg& g, int x, NodeSet targets) {
    std::map<int, int> prev;
    std::vector<int> queue{x};
    NodeSet seen = NodeSet::single(x);
    for (std::size_t i = 0; i < queue.size(); ++i) {
        const int v = queue[i];
        if (v != x && targets.contains(v)) {
            Witness w;
            for (int u = v; u != x; u = prev[u]) w.nodes.push_back(u);
            w.nodes.push_back(x);
            std::reverse(w.nodes.begin(), w.nodes.end());
            w.links.assign(w.nodes.size() - 1, Link::undirected);
            return w;
        }
        for (int u : g.neighbors(v)) {
            if (seen.contains(u)) continue;
            seen.insert(u);
            prev[u] = v;
            queue.push_back(u);
        }
    }
    return std::nullopt;
}

struct MarginalStep {
    std::optional<Witness> witness;
    ExprPtr estimand; // over w2 \ x, conditional on the context
    Admg graph;       // (G_W)^{W''}
};

/// One application of the single-variable marginal theorem to `gi` with
/// W = w, W'' = w2 and factors drawn from `dist` given `context`.
inline MarginalStep marginal_step(const Admg& gi, NodeSet w, NodeSet w2, int x, const std::string& dist,
                                  const std::vector<int>& context) {
    MarginalStep out;
    out.graph = marginal_graph(induced_subgraph(gi, w), w2);
    const Admg& gm = out.graph;
    const NodeSet comp_x = component_of(gm, w2, x);
    if (auto wit = line_path(gm, x, gm.children(x) & comp_x)) {
        out.witness = wit;
        return out;
    }
    std::vector<ExprPtr> factors{marginalize(q_factor(gm, w2, comp_x, context, dist), x)};
    for (NodeSet comp : undirected_components(gm, w2)) {
        if (comp == comp_x) continue;
        factors.push_back(q_factor(gm, w2, comp, context, dist));
    }
    out.estimand = product(factors);
    return out;
}

inline ExprPtr marginalize_to(const Admg& g, const ExprPtr& e, NodeSet drop) {
    if (drop.empty()) return e;
    return marginalize(e, by_label(g, drop));
}

} // namespace detail

/// From e = p(t | do(x), W') with W' ancestral and free of x, the estimand of
/// p(y | do(x), given) for y and given inside t and W'.
inline ExprPtr lift(const Admg& g, const ExprPtr& e, NodeSet t, NodeSet w_prime, NodeSet y, NodeSet given) {
    if (!(y | given).subset_of(t | w_prime)) throw InputError("query not covered by the identified distribution");
    if (given.subset_of(w_prime)) {
        const NodeSet y1 = y - w_prime;
        ExprPtr ey = simplify(detail::marginalize_to(g, e, t - y1));
        const NodeSet rest = w_prime - given;
        if (rest.empty()) return ey;
        ExprPtr joint = product({prob(by_label(g, rest), by_label(g, given)), ey});
        return simplify(detail::marginalize_to(g, joint, rest - y));
    }
    ExprPtr joint = product({prob(by_label(g, w_prime)), e});
    const NodeSet all = t | w_prime;
    ExprPtr num = detail::marginalize_to(g, joint, all - (y | given));
    ExprPtr den = detail::marginalize_to(g, joint, all - given);
    return simplify(quotient(num, den));
}

/// p(W \ x | do(x), W'): identified iff no line path joins x to a child of x in G_W.
inline IdentificationResult identify_single_full(const Admg& g, NodeSet w_prime, int x) {
    if (!is_ancestral(g, w_prime)) throw InputError("W' must be ancestral");
    const NodeSet w = g.nodes() - w_prime;
    if (!w.contains(x)) throw InputError("x must lie outside W'");
    IdentificationResult r;
    r.criterion = "single-variable";
    auto step = detail::marginal_step(g, w, w, x, "p", by_label(g, w_prime));
    if (step.witness) {
        r.verdict = Verdict::not_identified;
        r.witness = step.witness;
        return r;
    }
    r.verdict = Verdict::identified;
    r.estimand = simplify(step.estimand);
    return r;
}

/// A line path from x to one of its children inside G_{W''}, which makes
/// p(W'' \ x | do(x), W') non-identifiable.
inline std::optional<Witness> not_identifiable_by_subset(const Admg& g, NodeSet w_prime, NodeSet w2, int x) {
    if (!w2.contains(x)) throw InputError("x must belong to W''");
    if (w2.intersects(w_prime)) throw InputError("W'' must lie outside W'");
    const Admg sub = induced_subgraph(g, w2);
    return detail::line_path(sub, x, g.children(x) & component_of(sub, w2, x));
}

enum class MarginalVariant { conditional, joint, marginal };

/// Marginal theorem with W'' = An(y + x) \ W'. The estimand ranges over
/// W'' \ x given W' (conditional), together with W' (joint), or with W'
/// summed out (marginal).
inline IdentificationResult identify_single_marginal(const Admg& g, NodeSet w_prime, NodeSet y, int x,
                                                     MarginalVariant variant = MarginalVariant::conditional) {
    if (!is_ancestral(g, w_prime)) throw InputError("W' must be ancestral");
    if (w_prime.contains(x) || y.contains(x) || y.intersects(w_prime)) throw InputError("sets must be disjoint");
    const NodeSet w = g.nodes() - w_prime;
    const NodeSet w2 = g.ancestors_of(y.with(x)) - w_prime;
    IdentificationResult r;
    r.criterion = "marginal";
    auto step = detail::marginal_step(g, w, w2, x, "p", by_label(g, w_prime));
    if (step.witness) {
        r.verdict = Verdict::not_identified;
        r.witness = step.witness;
        r.note = "marginal theorem does not apply";
        return r;
    }
    r.verdict = Verdict::identified;
    const NodeSet t = w2.without(x);
    switch (variant) {
    case MarginalVariant::conditional: r.estimand = simplify(step.estimand); break;
    case MarginalVariant::joint: r.estimand = lift(g, step.estimand, t, w_prime, t | w_prime, {}); break;
    case MarginalVariant::marginal: r.estimand = lift(g, step.estimand, t, w_prime, t, {}); break;
    }
    return r;
}

/// Chains the marginal theorem over orderings of x. Returns
/// p(y | do(x), W'); failure of every ordering is reported as undecided.
inline IdentificationResult identify_multi(const Admg& g, NodeSet w_prime, NodeSet y, NodeSet x) {
    if (!is_ancestral(g, w_prime)) throw InputError("W' must be ancestral");
    if (x.empty() || x.intersects(w_prime) || x.intersects(y) || y.intersects(w_prime)) {
        throw InputError("sets must be disjoint and x nonempty");
    }
    IdentificationResult r;
    r.criterion = "multi";
    const NodeSet w = g.nodes() - w_prime;
    const NodeSet w2 = g.ancestors_of(y | x) - w_prime;
    const Admg g1 = marginal_graph(induced_subgraph(g, w), w2);
    std::vector<int> sigma = by_label(g, x);
    std::vector<std::string> tried;
    do {
        std::vector<Definition> defs;
        Admg gi = g1;
        NodeSet prev_in_graph;
        std::vector<int> context = by_label(g, w_prime);
        std::string dist = "p";
        bool ok = true;
        for (std::size_t i = 0; i < sigma.size(); ++i) {
            const int xi = sigma[i];
            NodeSet remaining;
            for (std::size_t k = i + 1; k < sigma.size(); ++k) remaining.insert(sigma[k]);
            const NodeSet wi = gi.nodes() - prev_in_graph;
            const NodeSet w2i = gi.ancestors_of(y | remaining | NodeSet::single(xi)) & wi;
            auto step = detail::marginal_step(gi, wi, w2i, xi, dist, context);
            if (step.witness) {
                std::string order;
                for (int v : sigma) order += g.label(v);
                tried.push_back(order + ": step " + std::to_string(i + 1) + " blocked by " + step.witness->render(g));
                ok = false;
                break;
            }
            context.push_back(xi);
            const NodeSet ti = w2i.without(xi);
            if (i + 1 == sigma.size()) {
                r.verdict = Verdict::identified;
                r.estimand = simplify(detail::marginalize_to(g, step.estimand, ti - y));
                r.definitions = defs;
                r.derivation = tried;
                return r;
            }
            dist = "p" + std::to_string(i + 2);
            defs.push_back({dist, by_label(g, ti), context, simplify(step.estimand)});
            gi = intervene(step.graph, NodeSet::single(xi));
            prev_in_graph = NodeSet::single(xi);
        }
        (void)ok;
    } while (std::next_permutation(sigma.begin(), sigma.end(),
                                   [&](int a, int b) { return g.label(a) < g.label(b); }));
    r.verdict = Verdict::undecided;
    r.derivation = tried;
    r.note = "no ordering succeeded";
    return r;
}

/// Final conditional theorem: W' is widened by the nodes that descend from
/// neither x nor y before applying the marginal theorem.
inline IdentificationResult identify_conditional(const Admg& g, int x, NodeSet y, NodeSet w_prime) {
    if (!is_ancestral(g, w_prime)) throw InputError("W' must be ancestral");
    const NodeSet xs = NodeSet::single(x);
    const NodeSet t = g.nodes() - g.descendants_of(xs | y);
    const NodeSet wn = w_prime | t;
    IdentificationResult r;
    r.criterion = "conditional";
    const NodeSet w2 = g.ancestors_of(y.with(x)) - wn;
    auto step = detail::marginal_step(g, g.nodes() - wn, w2, x, "p", by_label(g, wn));
    if (step.witness) {
        r.verdict = Verdict::undecided;
        r.witness = step.witness;
        return r;
    }
    r.verdict = Verdict::identified;
    r.estimand = lift(g, step.estimand, w2.without(x), wn, y, w_prime);
    return r;
}

// ---------------------------------------------------------------------------
// Calculus search

namespace detail {

struct CalculusSearch {
    const Admg& g;
    int max_depth;
    std::map<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, int, int>,
             std::optional<std::pair<ExprPtr, std::vector<std::string>>>>
        memo;

    using Found = std::optional<std::pair<ExprPtr, std::vector<std::string>>>;

    std::string step(Rule r, NodeSet y, NodeSet x, NodeSet w, NodeSet y2, NodeSet x2, NodeSet w2) const {
        return "rule " + std::to_string(static_cast<int>(r)) + ": " + format_query(g, y, x, w) + " = " +
               format_query(g, y2, x2, w2);
    }

    Found reduce(NodeSet y, NodeSet x, NodeSet w, int depth, int marg) {
        if (x.empty()) return std::make_pair(prob(by_label(g, y), by_label(g, w)), std::vector<std::string>{});
        if (depth == 0) return std::nullopt;
        auto key = std::make_tuple(y.bits(), x.bits(), w.bits(), depth, marg);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        memo[key] = std::nullopt;
        Found found = search(y, x, w, depth, marg);
        memo[key] = found;
        return found;
    }

    Found search(NodeSet y, NodeSet x, NodeSet w, int depth, int marg) {
        for (NodeSet s : subsets_by_size(x)) {
            if (s.empty()) continue;
            if (rule_applies(g, Rule::three, x - s, y, s, w)) {
                if (auto f = reduce(y, x - s, w, depth - 1, marg)) {
                    f->second.insert(f->second.begin(), step(Rule::three, y, x, w, y, x - s, w));
                    return f;
                }
            }
            if (rule_applies(g, Rule::two, x - s, y, s, w)) {
                if (auto f = reduce(y, x - s, w | s, depth - 1, marg)) {
                    f->second.insert(f->second.begin(), step(Rule::two, y, x, w, y, x - s, w | s));
                    return f;
                }
            }
        }
        for (NodeSet s : subsets_by_size(w)) {
            if (s.empty()) continue;
            if (rule_applies(g, Rule::one, x, y, s, w - s)) {
                if (auto f = reduce(y, x, w - s, depth - 1, marg)) {
                    f->second.insert(f->second.begin(), step(Rule::one, y, x, w, y, x, w - s));
                    return f;
                }
            }
        }
        if (marg <= 0) return std::nullopt;
        const NodeSet free = g.nodes() - (y | x | w);
        for (NodeSet z : subsets_by_size(free)) {
            if (z.empty() || z.size() > 2) continue;
            auto f1 = reduce(y, x, w | z, depth, marg - 1);
            if (!f1) continue;
            auto f2 = reduce(z, x, w, depth, marg - 1);
            if (!f2) continue;
            std::vector<std::string> d{"marginalize over " + g.format(z)};
            d.insert(d.end(), f1->second.begin(), f1->second.end());
            d.insert(d.end(), f2->second.begin(), f2->second.end());
            return std::make_pair(marginalize(product({f1->first, f2->first}), by_label(g, z)), d);
        }
        if (y.size() >= 2) {
            for (NodeSet y2 : subsets_by_size(y)) {
                if (y2.empty() || y2 == y) continue;
                auto f1 = reduce(y - y2, x, w | y2, depth, marg - 1);
                if (!f1) continue;
                auto f2 = reduce(y2, x, w, depth, marg - 1);
                if (!f2) continue;
                std::vector<std::string> d{"factorize " + format_query(g, y, x, w)};
                d.insert(d.end(), f1->second.begin(), f1->second.end());
                d.insert(d.end(), f2->second.begin(), f2->second.end());
                return std::make_pair(product({f1->first, f2->first}), d);
            }
        }
        return std::nullopt;
    }
};

} // namespace detail

/// Searches sequences of at most `depth` rule applications that remove every
/// intervention; `marginalization` allows one level of sum/factor splitting.
inline IdentificationResult identify_by_calculus(const Admg& g, NodeSet y, NodeSet x, NodeSet w, int depth = 3,
                                                 bool marginalization = false) {
    detail::CalculusSearch search{g, depth, {}};
    IdentificationResult r;
    r.criterion = "calculus";
    if (auto f = search.reduce(y, x, w, depth, marginalization ? 2 : 0)) {
        r.verdict = Verdict::identified;
        r.estimand = simplify(f->first);
        r.derivation = f->second;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Dispatcher

struct IdentifyOptions {
    bool strengthened = true;
    bool calculus = true;
    bool backdoor = true;
    bool frontdoor = true;
    bool decomposition = true;
    bool multi = true;
    int depth = 3;
};

namespace detail {

inline std::vector<NodeSet> ancestral_subsets(const Admg& g, NodeSet of) {
    std::vector<NodeSet> out;
    for (NodeSet s : subsets_by_size(of))
        if (is_ancestral(g, s)) out.push_back(s);
    std::reverse(out.begin(), out.end());
    return out;
}

inline IdentificationResult identified(std::string criterion, ExprPtr e, std::vector<std::string> derivation = {}) {
    IdentificationResult r;
    r.verdict = Verdict::identified;
    r.criterion = std::move(criterion);
    r.estimand = simplify(std::move(e));
    r.derivation = std::move(derivation);
    return r;
}

} // namespace detail

inline IdentificationResult identify(const Admg& g, const EffectQuery& q, const IdentifyOptions& opt = {}) {
    for (NodeSet s : {q.y, q.x, q.given}) g.require_subset(s);
    if (q.y.empty()) throw InputError("the outcome set must be nonempty");
    if (q.y.intersects(q.x) || q.y.intersects(q.given) || q.x.intersects(q.given)) {
        throw InputError("outcome, intervention and conditioning sets must be disjoint");
    }
    const bool lines = g.has_undirected_edges();
    const bool biarrows = g.has_bidirected_edges();
    if (lines && biarrows) {
        IdentificationResult r;
        r.note = "graphs with both undirected and bidirected edges are not supported";
        return r;
    }
    if (q.x.empty()) return detail::identified("observational", prob(by_label(g, q.y), by_label(g, q.given)));

    const bool single = q.x.size() == 1;
    const int x = q.x.first();
    const NodeSet de_x = g.descendants_of(q.x);
    const NodeSet others = g.nodes() - (q.x | q.y | q.given);

    std::optional<Witness> strengthened;
    if (opt.strengthened && single && lines && is_ancestral(g, q.given)) {
        strengthened = not_identifiable_by_subset(g, q.given, q.y.with(x), x);
    }
    std::vector<NodeSet> candidates;
    if (q.ancestral) {
        if (!is_ancestral(g, *q.ancestral)) throw InputError("the given W' is not ancestral");
        candidates.push_back(*q.ancestral);
    } else {
        candidates = detail::ancestral_subsets(g, q.given | q.y);
    }
    auto decompose = [&]() -> std::optional<IdentificationResult> {
        if (!opt.decomposition || !single || biarrows) return std::nullopt;
        for (NodeSet wp : candidates) {
            if (wp.contains(x)) continue;
            const NodeSet w2 = g.ancestors_of(q.y | q.given | q.x) - wp;
            auto step = detail::marginal_step(g, g.nodes() - wp, w2, x, "p", by_label(g, wp));
            if (step.witness) continue;
            return detail::identified("decomposition", lift(g, step.estimand, w2.without(x), wp, q.y, q.given));
        }
        const NodeSet t = g.nodes() - g.descendants_of(q.x | q.y | q.given);
        for (NodeSet wp : candidates) {
            const NodeSet wn = wp | t;
            if (wn == wp || wn.contains(x)) continue;
            const NodeSet w2 = g.ancestors_of(q.y | q.given | q.x) - wn;
            auto step = detail::marginal_step(g, g.nodes() - wn, w2, x, "p", by_label(g, wn));
            if (step.witness) continue;
            return detail::identified("conditional", lift(g, step.estimand, w2.without(x), wn, q.y, q.given));
        }
        return std::nullopt;
    };
    if (strengthened) {
        if (auto r = decompose()) {
            r->note = "identified from a wider ancestral set although " + strengthened->render(g) +
                      " meets the strengthened pattern";
            return *r;
        }
        IdentificationResult r;
        r.verdict = Verdict::not_identified;
        r.criterion = "strengthened";
        r.witness = strengthened;
        return r;
    }
    if (opt.calculus) {
        auto r = identify_by_calculus(g, q.y, q.x, q.given, opt.depth, false);
        if (r.identified()) return r;
    }
    if (opt.backdoor && single) {
        for (NodeSet z : subsets_by_size(others - de_x)) {
            if (auto e = backdoor(g, x, q.y, q.given, z)) return detail::identified("back-door", *e);
        }
    }
    if (opt.frontdoor && single) {
        for (NodeSet extra : subsets_by_size(others - de_x)) {
            const NodeSet w = q.given | extra;
            if (!extra.empty() && !rule_applies(g, Rule::three, {}, extra, q.x, q.given)) continue;
            for (NodeSet z : subsets_by_size(g.nodes() - (q.x | q.y | w))) {
                auto e = frontdoor(g, x, q.y, w, z);
                if (!e) continue;
                if (extra.empty()) return detail::identified("front-door", *e);
                const auto es = by_label(g, extra);
                return detail::identified(
                    "front-door", marginalize(product({prob(es, by_label(g, q.given)), *e}), es),
                    {"p(" + g.format(extra) + "|do(" + g.label(x) + ")) drops the intervention by rule 3"});
            }
        }
    }
    if (opt.calculus) {
        auto r = identify_by_calculus(g, q.y, q.x, q.given, opt.depth, true);
        if (r.identified()) return r;
    }
    if (biarrows) return {};

    if (auto r = decompose()) return *r;
    if (opt.multi && !single) {
        const NodeSet t = g.nodes() - g.descendants_of(q.x | q.y | q.given);
        std::vector<NodeSet> all = candidates;
        for (NodeSet wp : candidates)
            if ((wp | t) != wp) all.push_back(wp | t);
        for (NodeSet wp : all) {
            if (wp.intersects(q.x)) continue;
            const NodeSet y_ext = (g.ancestors_of(q.y | q.given | q.x) - wp) - q.x;
            auto r = identify_multi(g, wp, y_ext, q.x);
            if (!r.identified()) continue;
            r.estimand = lift(g, r.estimand, y_ext, wp, q.y, q.given);
            return r;
        }
    }
    IdentificationResult r;
    r.note = "no criterion applied";
    return r;
}

} // namespace admg

#endif // ADMG_IDENTIFY_HPP
