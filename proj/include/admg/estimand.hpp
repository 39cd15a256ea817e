#ifndef ADMG_ESTIMAND_HPP
#define ADMG_ESTIMAND_HPP

#include <atomic>
#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "admg/error.hpp"
#include "admg/gaussian.hpp"
#include "admg/node_set.hpp"

namespace admg {

/// A variable occurrence. bound == 0 is a free variable; otherwise the id of
/// the enclosing Sum that binds it.
struct Var {
    int node = 0;
    int bound = 0;
    bool operator==(const Var&) const = default;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Scalar {
    double value = 1.0;
};
struct Prob {
    std::string dist = "p";
    std::vector<Var> targets;
    std::vector<Var> given;
};
struct Sum {
    int id = 0;
    int node = 0;
    ExprPtr body;
};
struct Product {
    std::vector<ExprPtr> factors;
};
struct Quotient {
    ExprPtr num;
    ExprPtr den;
};

struct Expr {
    std::variant<Scalar, Prob, Sum, Product, Quotient> node;
};

/// Named intermediate distribution name(targets | context) := expr.
struct Definition {
    std::string name;
    std::vector<int> targets;
    std::vector<int> context;
    ExprPtr expr;
};

namespace detail {

inline std::atomic<int>& bound_counter() {
    static std::atomic<int> next{1};
    return next;
}

inline void reserve_bound_id(int id) {
    auto& c = bound_counter();
    int cur = c.load();
    while (cur <= id && !c.compare_exchange_weak(cur, id + 1)) {
    }
}

inline ExprPtr make(auto&& v) { return std::make_shared<const Expr>(Expr{std::forward<decltype(v)>(v)}); }

inline std::vector<Var> free_vars(const std::vector<int>& nodes) {
    std::vector<Var> out;
    for (int v : nodes) out.push_back({v, 0});
    return out;
}

} // namespace detail

inline ExprPtr scalar(double v) { return detail::make(Scalar{v}); }
inline ExprPtr one() { return scalar(1.0); }

inline ExprPtr prob(const std::vector<int>& targets, const std::vector<int>& given = {},
                    const std::string& dist = "p") {
    return detail::make(Prob{dist, detail::free_vars(targets), detail::free_vars(given)});
}

inline ExprPtr prob_vars(std::vector<Var> targets, std::vector<Var> given, const std::string& dist = "p") {
    return detail::make(Prob{dist, std::move(targets), std::move(given)});
}

/// Product with nested products flattened; a single factor is returned as is.
inline ExprPtr product(const std::vector<ExprPtr>& factors) {
    std::vector<ExprPtr> flat;
    for (const auto& f : factors) {
        if (const auto* p = std::get_if<Product>(&f->node)) {
            flat.insert(flat.end(), p->factors.begin(), p->factors.end());
        } else {
            flat.push_back(f);
        }
    }
    if (flat.empty()) return one();
    if (flat.size() == 1) return flat.front();
    return detail::make(Product{std::move(flat)});
}

inline ExprPtr quotient(ExprPtr num, ExprPtr den) { return detail::make(Quotient{std::move(num), std::move(den)}); }

/// Replaces free occurrences of `node` by a variable bound to `id`.
inline ExprPtr bind(const ExprPtr& e, int node, int id) {
    auto fix = [&](std::vector<Var> vs) {
        for (auto& v : vs)
            if (v.node == node && v.bound == 0) v.bound = id;
        return vs;
    };
    return std::visit(
        [&](const auto& n) -> ExprPtr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Scalar>) {
                return e;
            } else if constexpr (std::is_same_v<T, Prob>) {
                return detail::make(Prob{n.dist, fix(n.targets), fix(n.given)});
            } else if constexpr (std::is_same_v<T, Sum>) {
                return detail::make(Sum{n.id, n.node, bind(n.body, node, id)});
            } else if constexpr (std::is_same_v<T, Product>) {
                std::vector<ExprPtr> fs;
                for (const auto& f : n.factors) fs.push_back(bind(f, node, id));
                return detail::make(Product{std::move(fs)});
            } else {
                return detail::make(Quotient{bind(n.num, node, id), bind(n.den, node, id)});
            }
        },
        e->node);
}

/// sum_node body
inline ExprPtr marginalize(const ExprPtr& body, int node) {
    const int id = detail::bound_counter().fetch_add(1);
    return detail::make(Sum{id, node, bind(body, node, id)});
}

/// Nested sums; nodes[0] is the outermost.
inline ExprPtr marginalize(ExprPtr body, const std::vector<int>& nodes) {
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) body = marginalize(body, *it);
    return body;
}

inline NodeSet free_variables(const ExprPtr& e) {
    return std::visit(
        [&](const auto& n) -> NodeSet {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Scalar>) {
                return {};
            } else if constexpr (std::is_same_v<T, Prob>) {
                NodeSet s;
                for (const auto& v : n.targets)
                    if (v.bound == 0) s.insert(v.node);
                for (const auto& v : n.given)
                    if (v.bound == 0) s.insert(v.node);
                return s;
            } else if constexpr (std::is_same_v<T, Sum>) {
                return free_variables(n.body);
            } else if constexpr (std::is_same_v<T, Product>) {
                NodeSet s;
                for (const auto& f : n.factors) s |= free_variables(f);
                return s;
            } else {
                return free_variables(n.num) | free_variables(n.den);
            }
        },
        e->node);
}

/// Structural key that distinguishes bound variables by id.
inline std::string structural_key(const ExprPtr& e) {
    auto vars = [](const std::vector<Var>& vs) {
        std::string s;
        for (const auto& v : vs) s += std::to_string(v.node) + (v.bound ? "#" + std::to_string(v.bound) : "") + ",";
        return s;
    };
    return std::visit(
        [&](const auto& n) -> std::string {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Scalar>) {
                std::ostringstream o;
                o << n.value;
                return o.str();
            } else if constexpr (std::is_same_v<T, Prob>) {
                return n.dist + "(" + vars(n.targets) + "|" + vars(n.given) + ")";
            } else if constexpr (std::is_same_v<T, Sum>) {
                return "S" + std::to_string(n.id) + ":" + std::to_string(n.node) + "{" + structural_key(n.body) + "}";
            } else if constexpr (std::is_same_v<T, Product>) {
                std::string s = "*{";
                for (const auto& f : n.factors) s += structural_key(f) + ";";
                return s + "}";
            } else {
                return "/{" + structural_key(n.num) + ";" + structural_key(n.den) + "}";
            }
        },
        e->node);
}

namespace detail {

class Renderer {
public:
    Renderer(const std::vector<std::string>& labels, NodeSet free) : labels_(labels), free_(free) {}

    std::string expr(const ExprPtr& e) {
        return std::visit([&](const auto& n) { return node(n); }, e->node);
    }

private:
    const std::vector<std::string>& labels_;
    NodeSet free_;
    std::map<int, std::string> names_;
    std::map<int, int> depth_; // node -> enclosing binders

    const std::string& label(int v) const {
        if (v < 0 || v >= static_cast<int>(labels_.size())) throw InputError("estimand refers to unknown node");
        return labels_[v];
    }

    std::string var(const Var& v) const {
        if (v.bound == 0) return label(v.node);
        auto it = names_.find(v.bound);
        if (it == names_.end()) throw InputError("estimand has an unbound variable");
        return it->second;
    }

    std::string list(const std::vector<Var>& vs) const {
        std::string s;
        for (std::size_t i = 0; i < vs.size(); ++i) s += (i ? "," : "") + var(vs[i]);
        return s;
    }

    static bool composite(const ExprPtr& e) {
        return !std::holds_alternative<Prob>(e->node) && !std::holds_alternative<Scalar>(e->node);
    }

    std::string node(const Scalar& s) {
        std::ostringstream o;
        o << s.value;
        return o.str();
    }

    std::string node(const Prob& p) {
        std::string s = p.dist + "(" + list(p.targets);
        if (!p.given.empty()) s += "|" + list(p.given);
        return s + ")";
    }

    std::string node(const Sum& s) {
        std::string name;
        for (char c : label(s.node)) name += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        const int primes = (free_.contains(s.node) ? 1 : 0) + depth_[s.node];
        name += std::string(primes, '\'');
        names_[s.id] = name;
        ++depth_[s.node];
        std::string body = expr(s.body);
        --depth_[s.node];
        if (std::holds_alternative<Quotient>(s.body->node)) body = "[" + body + "]";
        return "sum_" + name + " " + body;
    }

    std::string node(const Product& p) {
        std::string s;
        for (std::size_t i = 0; i < p.factors.size(); ++i) {
            const auto& f = p.factors[i];
            std::string t = expr(f);
            const bool last = i + 1 == p.factors.size();
            if (std::holds_alternative<Quotient>(f->node) || (std::holds_alternative<Sum>(f->node) && !last) ||
                std::holds_alternative<Product>(f->node)) {
                t = "[" + t + "]";
            }
            s += (i ? " " : "") + t;
        }
        return s;
    }

    std::string node(const Quotient& q) {
        std::string a = expr(q.num);
        std::string b = expr(q.den);
        if (composite(q.num)) a = "[" + a + "]";
        if (composite(q.den)) b = "[" + b + "]";
        return a + " / " + b;
    }
};

} // namespace detail

/// Text form: `sum_c p(B|A,c) p(c)`. Bound variables are lowercase labels,
/// primed when the same node is free or already bound in an enclosing sum.
inline std::string render(const ExprPtr& e, const std::vector<std::string>& labels) {
    return detail::Renderer(labels, free_variables(e)).expr(e);
}

inline std::string render(const Definition& d, const std::vector<std::string>& labels) {
    Prob head{d.name, detail::free_vars(d.targets), detail::free_vars(d.context)};
    return render(detail::make(head), labels) + " = " + render(d.expr, labels);
}

namespace detail {

inline std::vector<ExprPtr> factors_of(const ExprPtr& e) {
    if (const auto* p = std::get_if<Product>(&e->node)) return p->factors;
    return {e};
}

inline bool mentions(const ExprPtr& e, int id) {
    return std::visit(
        [&](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Scalar>) {
                return false;
            } else if constexpr (std::is_same_v<T, Prob>) {
                for (const auto& v : n.targets)
                    if (v.bound == id) return true;
                for (const auto& v : n.given)
                    if (v.bound == id) return true;
                return false;
            } else if constexpr (std::is_same_v<T, Sum>) {
                return mentions(n.body, id);
            } else if constexpr (std::is_same_v<T, Product>) {
                for (const auto& f : n.factors)
                    if (mentions(f, id)) return true;
                return false;
            } else {
                return mentions(n.num, id) || mentions(n.den, id);
            }
        },
        e->node);
}

inline bool is_one(const ExprPtr& e) {
    const auto* s = std::get_if<Scalar>(&e->node);
    return s && s->value == 1.0;
}

inline ExprPtr simplify_once(const ExprPtr& e);

inline ExprPtr simplify_product(std::vector<ExprPtr> factors) {
    std::vector<ExprPtr> out;
    double k = 1.0;
    for (auto& f : factors) {
        for (auto& g : factors_of(simplify_once(f))) {
            if (const auto* s = std::get_if<Scalar>(&g->node)) {
                k *= s->value;
            } else {
                out.push_back(g);
            }
        }
    }
    if (k != 1.0) out.insert(out.begin(), scalar(k));
    return product(out);
}

inline ExprPtr simplify_sum(const Sum& s) {
    ExprPtr body = simplify_once(s.body);
    std::vector<ExprPtr> outside, inside;
    for (const auto& f : factors_of(body)) (mentions(f, s.id) ? inside : outside).push_back(f);
    if (inside.empty()) return make(Sum{s.id, s.node, body});
    if (inside.size() == 1) {
        if (const auto* p = std::get_if<Prob>(&inside[0]->node)) {
            bool in_given = false;
            int in_targets = 0;
            for (const auto& v : p->given) in_given |= v.bound == s.id;
            for (const auto& v : p->targets) in_targets += v.bound == s.id;
            if (!in_given && in_targets == 1) {
                Prob rest = *p;
                std::erase_if(rest.targets, [&](const Var& v) { return v.bound == s.id; });
                if (!rest.targets.empty()) outside.push_back(make(rest));
                return product(outside);
            }
        }
    }
    outside.push_back(make(Sum{s.id, s.node, product(inside)}));
    return product(outside);
}

inline ExprPtr simplify_quotient(const Quotient& q) {
    ExprPtr num = simplify_once(q.num);
    ExprPtr den = simplify_once(q.den);
    if (structural_key(num) == structural_key(den)) return one();
    auto nf = factors_of(num);
    auto df = factors_of(den);
    std::vector<ExprPtr> keep_den;
    for (const auto& d : df) {
        const std::string key = structural_key(d);
        auto it = std::find_if(nf.begin(), nf.end(), [&](const ExprPtr& n) { return structural_key(n) == key; });
        if (it != nf.end()) {
            nf.erase(it);
        } else if (!is_one(d)) {
            keep_den.push_back(d);
        }
    }
    ExprPtr n2 = simplify_product(nf);
    if (keep_den.empty()) return n2;
    return quotient(n2, product(keep_den));
}

inline ExprPtr simplify_once(const ExprPtr& e) {
    return std::visit(
        [&](const auto& n) -> ExprPtr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Scalar> || std::is_same_v<T, Prob>) {
                return e;
            } else if constexpr (std::is_same_v<T, Sum>) {
                return simplify_sum(n);
            } else if constexpr (std::is_same_v<T, Product>) {
                return simplify_product(n.factors);
            } else {
                return simplify_quotient(n);
            }
        },
        e->node);
}

} // namespace detail

/// Flattens products, cancels common quotient factors, and removes sums whose
/// variable occurs only as a target of a single term.
inline ExprPtr simplify(ExprPtr e) {
    std::string key = structural_key(e);
    while (true) {
        ExprPtr next = detail::simplify_once(e);
        std::string k2 = structural_key(next);
        if (k2 == key) return next;
        e = std::move(next);
        key = std::move(k2);
    }
}

// ---------------------------------------------------------------------------
// Gaussian evaluation through canonical (information) forms

namespace detail {

struct Slot {
    int node = 0;
    int bound = 0;
    auto operator<=>(const Slot&) const = default;
};

/// exp(c + h'x - x'Kx/2) over `slots`.
struct CanonicalForm {
    std::vector<Slot> slots;
    Eigen::MatrixXd K;
    Eigen::VectorXd h;
    double c = 0.0;

    int find(Slot s) const {
        for (std::size_t i = 0; i < slots.size(); ++i)
            if (slots[i] == s) return static_cast<int>(i);
        return -1;
    }

    static CanonicalForm constant(double log_value) {
        CanonicalForm f;
        f.K = Eigen::MatrixXd(0, 0);
        f.h = Eigen::VectorXd(0);
        f.c = log_value;
        return f;
    }

    CanonicalForm aligned(const std::vector<Slot>& target) const {
        CanonicalForm out;
        out.slots = target;
        out.K = Eigen::MatrixXd::Zero(target.size(), target.size());
        out.h = Eigen::VectorXd::Zero(target.size());
        out.c = c;
        std::vector<int> map;
        for (const auto& s : slots) {
            auto it = std::find(target.begin(), target.end(), s);
            map.push_back(static_cast<int>(it - target.begin()));
        }
        for (std::size_t i = 0; i < slots.size(); ++i) {
            out.h(map[i]) = h(i);
            for (std::size_t j = 0; j < slots.size(); ++j) out.K(map[i], map[j]) = K(i, j);
        }
        return out;
    }
};

inline CanonicalForm combine(const CanonicalForm& a, const CanonicalForm& b, double sign) {
    std::vector<Slot> all = a.slots;
    for (const auto& s : b.slots)
        if (a.find(s) < 0) all.push_back(s);
    CanonicalForm x = a.aligned(all);
    CanonicalForm y = b.aligned(all);
    x.K += sign * y.K;
    x.h += sign * y.h;
    x.c += sign * y.c;
    return x;
}

/// Integrates out the slots in `drop`.
inline CanonicalForm integrate(const CanonicalForm& f, const std::vector<Slot>& drop) {
    std::vector<int> a, b;
    std::vector<Slot> kept;
    for (std::size_t i = 0; i < f.slots.size(); ++i) {
        if (std::find(drop.begin(), drop.end(), f.slots[i]) != drop.end()) {
            b.push_back(static_cast<int>(i));
        } else {
            a.push_back(static_cast<int>(i));
            kept.push_back(f.slots[i]);
        }
    }
    if (b.empty()) return f;
    auto inv = spd_inverse(take(f.K, b, b), "precision block of an integrated variable", 1e-12);
    const Eigen::MatrixXd kab = take(f.K, a, b);
    const Eigen::VectorXd hb = take(f.h, b);
    CanonicalForm out;
    out.slots = kept;
    out.K = symmetrize(take(f.K, a, a) - kab * inv.inverse * kab.transpose());
    out.h = take(f.h, a) - kab * inv.inverse * hb;
    out.c = f.c + 0.5 * hb.dot(inv.inverse * hb) + 0.5 * b.size() * std::log(2.0 * M_PI) - 0.5 * inv.log_det;
    return out;
}

inline CanonicalForm substitute(const CanonicalForm& f, const std::map<int, double>& fixed) {
    std::vector<int> a, b;
    std::vector<Slot> kept;
    std::vector<double> vals;
    for (std::size_t i = 0; i < f.slots.size(); ++i) {
        const auto& s = f.slots[i];
        auto it = fixed.find(s.node);
        if (s.bound == 0 && it != fixed.end()) {
            b.push_back(static_cast<int>(i));
            vals.push_back(it->second);
        } else {
            a.push_back(static_cast<int>(i));
            kept.push_back(s);
        }
    }
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
    CanonicalForm out;
    out.slots = kept;
    out.K = take(f.K, a, a);
    out.h = take(f.h, a) - take(f.K, a, b) * v;
    out.c = f.c + take(f.h, b).dot(v) - 0.5 * v.dot(take(f.K, b, b) * v);
    return out;
}

/// Canonical form of the conditional density p(t | g) of a Gaussian.
inline CanonicalForm conditional_form(const GaussianDist& d, const std::vector<int>& t, const std::vector<int>& g) {
    auto tp = d.positions(t);
    auto gp = d.positions(g);
    const int nt = static_cast<int>(t.size());
    const int ng = static_cast<int>(g.size());
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(nt, ng);
    Eigen::VectorXd m0 = take(d.mean, tp);
    Eigen::MatrixXd s = take(d.cov, tp, tp);
    if (ng > 0) {
        auto ginv = spd_inverse(take(d.cov, gp, gp), "conditioning covariance");
        const Eigen::MatrixXd s_tg = take(d.cov, tp, gp);
        b = s_tg * ginv.inverse;
        m0 -= b * take(d.mean, gp);
        s = symmetrize(s - b * s_tg.transpose());
    }
    CanonicalForm f;
    f.K = Eigen::MatrixXd::Zero(nt + ng, nt + ng);
    f.h = Eigen::VectorXd::Zero(nt + ng);
    if (nt == 0) return f;
    auto sinv = spd_inverse(s, "conditional covariance");
    Eigen::MatrixXd m(nt, nt + ng);
    m << Eigen::MatrixXd::Identity(nt, nt), -b;
    f.K = symmetrize(m.transpose() * sinv.inverse * m);
    f.h = m.transpose() * sinv.inverse * m0;
    f.c = -0.5 * m0.dot(sinv.inverse * m0) - 0.5 * nt * std::log(2.0 * M_PI) - 0.5 * sinv.log_det;
    return f;
}

class Evaluator {
public:
    Evaluator(const std::map<std::string, GaussianDist>& base, const std::vector<Definition>& defs)
        : base_(base) {
        for (const auto& d : defs) {
            CanonicalForm f = eval(d.expr);
            defs_.emplace(d.name, std::make_pair(d, std::move(f)));
        }
    }

    CanonicalForm eval(const ExprPtr& e) {
        return std::visit([&](const auto& n) { return node(n); }, e->node);
    }

private:
    const std::map<std::string, GaussianDist>& base_;
    std::map<std::string, std::pair<Definition, CanonicalForm>> defs_;

    static std::vector<Slot> slots_of(const std::vector<Var>& vs) {
        std::vector<Slot> out;
        for (const auto& v : vs) out.push_back({v.node, v.bound});
        return out;
    }

    CanonicalForm node(const Scalar& s) {
        if (!(s.value > 0)) throw UnsupportedExpression("non-positive scalar factor");
        return CanonicalForm::constant(std::log(s.value));
    }

    CanonicalForm node(const Prob& p) {
        std::vector<int> t, g;
        NodeSet seen;
        for (const auto& v : p.targets) t.push_back(v.node);
        for (const auto& v : p.given) g.push_back(v.node);
        for (int v : t) {
            if (seen.contains(v)) throw UnsupportedExpression("a term mentions the same variable twice");
            seen.insert(v);
        }
        for (int v : g) {
            if (seen.contains(v)) throw UnsupportedExpression("a term mentions the same variable twice");
            seen.insert(v);
        }
        CanonicalForm f;
        if (auto it = base_.find(p.dist); it != base_.end()) {
            f = conditional_form(it->second, t, g);
            std::vector<Slot> s;
            for (int v : t) s.push_back({v, 0});
            for (int v : g) s.push_back({v, 0});
            f.slots = s;
        } else if (auto jt = defs_.find(p.dist); jt != defs_.end()) {
            f = from_definition(jt->second.first, jt->second.second, t, g);
        } else {
            throw InputError("unknown distribution '" + p.dist + "'");
        }
        // rename (node, 0) slots to the term's variables
        std::vector<Var> all = p.targets;
        all.insert(all.end(), p.given.begin(), p.given.end());
        for (auto& s : f.slots) {
            for (const auto& v : all)
                if (v.node == s.node) s.bound = v.bound;
        }
        return f;
    }

    static CanonicalForm from_definition(const Definition& d, const CanonicalForm& form, const std::vector<int>& t,
                                         const std::vector<int>& g) {
        const NodeSet dt = NodeSet::of(d.targets);
        const NodeSet dc = NodeSet::of(d.context);
        const NodeSet ts = NodeSet::of(t);
        const NodeSet gs = NodeSet::of(g);
        if (!ts.subset_of(dt) || !dc.subset_of(gs) || !gs.subset_of(dt | dc)) {
            throw UnsupportedExpression("term over '" + d.name + "' does not match its definition");
        }
        std::vector<Slot> all;
        for (int v : dt | dc) all.push_back({v, 0});
        CanonicalForm full = form.aligned(all);
        std::vector<Slot> drop_joint, drop_given;
        for (int v : dt - (ts | gs)) drop_joint.push_back({v, 0});
        for (int v : dt - gs) drop_given.push_back({v, 0});
        return combine(integrate(full, drop_joint), integrate(full, drop_given), -1.0);
    }

    CanonicalForm node(const Sum& s) {
        CanonicalForm body = eval(s.body);
        const Slot slot{s.node, s.id};
        if (body.find(slot) < 0) throw UnsupportedExpression("sum over a variable the body does not use");
        return integrate(body, {slot});
    }

    CanonicalForm node(const Product& p) {
        CanonicalForm acc = CanonicalForm::constant(0.0);
        for (const auto& f : p.factors) acc = combine(acc, eval(f), 1.0);
        return acc;
    }

    CanonicalForm node(const Quotient& q) { return combine(eval(q.num), eval(q.den), -1.0); }
};

} // namespace detail

/// Evaluates an estimand in closed form. `base` maps distribution names (usually
/// "p") to joint Gaussians; `fixed` gives values for conditioning variables.
/// Returns the law of the remaining free variables, sorted by node index.
inline GaussianDist eval_gaussian(const ExprPtr& e, const std::map<std::string, GaussianDist>& base,
                                  const std::map<int, double>& fixed = {},
                                  const std::vector<Definition>& definitions = {}) {
    detail::Evaluator ev(base, definitions);
    detail::CanonicalForm f = detail::substitute(ev.eval(e), fixed);
    std::vector<int> order(f.slots.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return f.slots[a] < f.slots[b]; });
    GaussianDist out;
    for (int i : order) {
        if (f.slots[i].bound != 0) throw UnsupportedExpression("bound variable escapes its sum");
        out.vars.push_back(f.slots[i].node);
    }
    if (order.empty()) {
        out.mean = Eigen::VectorXd(0);
        out.cov = Eigen::MatrixXd(0, 0);
        out.log_mass = f.c;
        return out;
    }
    const Eigen::MatrixXd k = detail::take(f.K, order, order);
    const Eigen::VectorXd h = detail::take(f.h, order);
    auto inv = detail::spd_inverse(k, "precision of the result (unfixed conditioning variable?)", 1e-12);
    out.cov = inv.inverse;
    out.mean = inv.inverse * h;
    out.log_mass = f.c + 0.5 * h.dot(out.mean) + 0.5 * order.size() * std::log(2.0 * M_PI) - 0.5 * inv.log_det;
    return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const ExprPtr& e, const std::vector<std::string>& labels) {
    using nlohmann::json;
    auto vars = [&](const std::vector<Var>& vs) {
        json a = json::array();
        for (const auto& v : vs) {
            json o = {{"node", labels.at(v.node)}};
            if (v.bound) o["bound"] = v.bound;
            a.push_back(o);
        }
        return a;
    };
    return std::visit(
        [&](const auto& n) -> json {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Scalar>) {
                return {{"scalar", n.value}};
            } else if constexpr (std::is_same_v<T, Prob>) {
                return {{"prob", {{"dist", n.dist}, {"targets", vars(n.targets)}, {"given", vars(n.given)}}}};
            } else if constexpr (std::is_same_v<T, Sum>) {
                return {{"sum", {{"id", n.id}, {"node", labels.at(n.node)}, {"body", to_json(n.body, labels)}}}};
            } else if constexpr (std::is_same_v<T, Product>) {
                json a = json::array();
                for (const auto& f : n.factors) a.push_back(to_json(f, labels));
                return {{"product", a}};
            } else {
                return {{"quotient", {to_json(n.num, labels), to_json(n.den, labels)}}};
            }
        },
        e->node);
}

inline ExprPtr expr_from_json(const nlohmann::json& j, const std::vector<std::string>& labels) {
    auto index = [&](const std::string& name) {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == name) return static_cast<int>(i);
        throw InputError("unknown node '" + name + "' in estimand");
    };
    auto vars = [&](const nlohmann::json& a) {
        std::vector<Var> out;
        for (const auto& o : a) out.push_back({index(o.at("node").get<std::string>()), o.value("bound", 0)});
        return out;
    };
    if (j.contains("scalar")) return scalar(j.at("scalar").get<double>());
    if (j.contains("prob")) {
        const auto& p = j.at("prob");
        return prob_vars(vars(p.at("targets")), vars(p.at("given")), p.value("dist", std::string("p")));
    }
    if (j.contains("sum")) {
        const auto& s = j.at("sum");
        const int id = s.at("id").get<int>();
        detail::reserve_bound_id(id);
        return detail::make(Sum{id, index(s.at("node").get<std::string>()), expr_from_json(s.at("body"), labels)});
    }
    if (j.contains("product")) {
        std::vector<ExprPtr> fs;
        for (const auto& f : j.at("product")) fs.push_back(expr_from_json(f, labels));
        return detail::make(Product{std::move(fs)});
    }
    if (j.contains("quotient")) {
        const auto& q = j.at("quotient");
        return quotient(expr_from_json(q.at(0), labels), expr_from_json(q.at(1), labels));
    }
    throw InputError("malformed estimand JSON");
}

} // namespace admg

#endif // ADMG_ESTIMAND_HPP
