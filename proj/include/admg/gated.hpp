#ifndef ADMG_GATED_HPP
#define ADMG_GATED_HPP

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "admg/dsl.hpp"
#include "admg/error.hpp"
#include "admg/graph.hpp"
#include "admg/identify.hpp"
#include "admg/learn.hpp"
#include "admg/sem.hpp"

namespace admg {

enum class Comparator { gt, ge, lt, le, eq };
enum class GateMode { observed, intervened };

struct ValueGate {
    std::string var;
    Comparator op = Comparator::gt;
    double threshold = 0.0;
    GateMode mode = GateMode::observed;
    std::optional<std::string> mechanism;

    bool holds(double v) const {
        switch (op) {
        case Comparator::gt: return v > threshold;
        case Comparator::ge: return v >= threshold;
        case Comparator::lt: return v < threshold;
        case Comparator::le: return v <= threshold;
        case Comparator::eq: return v == threshold;
        }
        return false;
    }
};

/// Fires when L(D | numerator) / L(D | denominator) > theta.
struct LikelihoodGate {
    std::string numerator;
    std::string denominator;
    double theta = 1.0;
    bool refit = false;
};

struct Gate {
    std::string from;
    std::string to;
    std::variant<ValueGate, LikelihoodGate> when;
};

struct Context {
    std::string name;
    Admg graph;
    Subfamily family = Subfamily::admg;
    std::optional<GaussianSem> sem;
};

struct GatedModel {
    std::map<std::string, Context> contexts;
    std::vector<Gate> gates;
    std::string initial;

    const Context& context(const std::string& name) const {
        auto it = contexts.find(name);
        if (it == contexts.end()) throw InputError("unknown context '" + name + "'");
        return it->second;
    }
};

struct Event {
    enum class Kind { observe, intervene, data };
    Kind kind = Kind::observe;
    std::map<std::string, double> values;
    std::optional<std::string> mechanism;
    std::vector<std::string> columns;
    Eigen::MatrixXd rows;
};

struct Transition {
    int event = 0;
    std::string from;
    std::string to;
    std::string gate;
};

struct GateState {
    std::string context;
    std::vector<Transition> log;
    int events_seen = 0;
};

inline const char* to_string(Comparator c) {
    switch (c) {
    case Comparator::gt: return ">";
    case Comparator::ge: return ">=";
    case Comparator::lt: return "<";
    case Comparator::le: return "<=";
    case Comparator::eq: return "=";
    }
    return "?";
}

inline Comparator parse_comparator(const std::string& s) {
    if (s == ">") return Comparator::gt;
    if (s == ">=" || s == "≥") return Comparator::ge;
    if (s == "<") return Comparator::lt;
    if (s == "<=" || s == "≤") return Comparator::le;
    if (s == "=" || s == "==") return Comparator::eq;
    throw InputError("unknown comparator '" + s + "'");
}

inline std::string describe(const Gate& g) {
    if (const auto* v = std::get_if<ValueGate>(&g.when)) {
        std::string var = v->mode == GateMode::intervened ? "do(" + v->var + ")" : v->var;
        std::ostringstream t;
        t << v->threshold;
        std::string s = var + " " + to_string(v->op) + " " + t.str();
        if (v->mechanism) s += " | " + *v->mechanism;
        return s;
    }
    const auto& l = std::get<LikelihoodGate>(g.when);
    std::ostringstream t;
    t << l.theta;
    return "L(D|" + l.numerator + ")/L(D|" + l.denominator + ") > " + t.str() + (l.refit ? " (refit)" : "");
}

namespace detail {

struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    bool lo_closed = false;
    double hi = std::numeric_limits<double>::infinity();
    bool hi_closed = false;
};

inline Interval interval_of(const ValueGate& v) {
    Interval r;
    switch (v.op) {
    case Comparator::gt: r.lo = v.threshold; break;
    case Comparator::ge: r.lo = v.threshold, r.lo_closed = true; break;
    case Comparator::lt: r.hi = v.threshold; break;
    case Comparator::le: r.hi = v.threshold, r.hi_closed = true; break;
    case Comparator::eq: r.lo = r.hi = v.threshold, r.lo_closed = r.hi_closed = true; break;
    }
    return r;
}

inline bool intervals_meet(const Interval& a, const Interval& b) {
    double lo = std::max(a.lo, b.lo), hi = std::min(a.hi, b.hi);
    if (lo < hi) return true;
    if (lo > hi) return false;
    bool lo_ok = (a.lo < lo || a.lo_closed) && (b.lo < lo || b.lo_closed);
    bool hi_ok = (a.hi > hi || a.hi_closed) && (b.hi > hi || b.hi_closed);
    return lo_ok && hi_ok;
}

/// Whether some single event could fire both gates.
inline bool could_fire_together(const ValueGate& a, const ValueGate& b) {
    if (a.var != b.var) return false;
    if (a.mode == GateMode::intervened && b.mode == GateMode::intervened && a.mechanism && b.mechanism &&
        *a.mechanism != *b.mechanism) {
        return false;
    }
    return intervals_meet(interval_of(a), interval_of(b));
}

inline void check_family(const Context& c) {
    if (!in_family(c.graph, c.family)) {
        throw InputError("context '" + c.name + "' is tagged " + to_string(c.family) + " but its edges do not fit");
    }
}

} // namespace detail

inline GatedModel load_gated_json(const nlohmann::json& doc) {
    GatedModel m;
    if (!doc.contains("contexts") || !doc.at("contexts").is_object() || doc.at("contexts").empty()) {
        throw InputError("a gated model needs a nonempty \"contexts\" object");
    }
    for (const auto& [name, body] : doc.at("contexts").items()) {
        Context c;
        c.name = name;
        c.graph = parse_graph(body.at("graph").get<std::string>());
        c.family = parse_subfamily(body.value("family", std::string("admg")));
        detail::check_family(c);
        if (body.contains("sem")) {
            nlohmann::json sj = body.at("sem");
            if (!sj.contains("graph")) sj["graph"] = body.at("graph");
            c.sem = sem_from_json(sj);
            if (serialize_graph(c.sem->graph) != serialize_graph(c.graph)) {
                throw InputError("the SEM of context '" + name + "' is defined on a different graph");
            }
        }
        m.contexts.emplace(name, std::move(c));
    }
    if (doc.contains("initial")) {
        m.initial = doc.at("initial").get<std::string>();
    } else if (m.contexts.size() == 1) {
        m.initial = m.contexts.begin()->first;
    } else {
        throw InputError("a model with several contexts must name its initial context");
    }
    m.context(m.initial);

    for (const auto& gj : doc.value("gates", nlohmann::json::array())) {
        Gate g;
        g.from = gj.at("from").get<std::string>();
        g.to = gj.at("to").get<std::string>();
        const Context& from = m.context(g.from);
        const Context& to = m.context(g.to);
        const auto& w = gj.at("when");
        if (w.contains("ratio")) {
            LikelihoodGate l;
            l.numerator = w.at("ratio").at(0).get<std::string>();
            l.denominator = w.at("ratio").at(1).get<std::string>();
            m.context(l.numerator);
            m.context(l.denominator);
            l.theta = w.at("theta").get<double>();
            if (!std::isfinite(l.theta) || l.theta <= 0) throw InputError("gate threshold must be finite and positive");
            l.refit = w.value("refit", false);
            g.when = l;
        } else {
            ValueGate v;
            v.var = w.at("var").get<std::string>();
            if (!from.graph.find(v.var) || !to.graph.find(v.var)) {
                throw InputError("gate variable '" + v.var + "' must exist in both '" + g.from + "' and '" + g.to + "'");
            }
            v.op = parse_comparator(w.at("op").get<std::string>());
            v.threshold = w.at("value").get<double>();
            if (!std::isfinite(v.threshold)) throw InputError("gate threshold must be finite");
            const std::string mode = w.value("mode", std::string("observed"));
            if (mode == "observed") v.mode = GateMode::observed;
            else if (mode == "intervened") v.mode = GateMode::intervened;
            else throw InputError("unknown gate mode '" + mode + "'");
            if (w.contains("mechanism")) {
                if (v.mode != GateMode::intervened) throw InputError("only intervened gates carry a mechanism");
                v.mechanism = w.at("mechanism").get<std::string>();
            }
            g.when = v;
        }
        m.gates.push_back(std::move(g));
    }
    for (std::size_t i = 0; i < m.gates.size(); ++i)
        for (std::size_t j = i + 1; j < m.gates.size(); ++j) {
            if (m.gates[i].from != m.gates[j].from) continue;
            const auto* a = std::get_if<ValueGate>(&m.gates[i].when);
            const auto* b = std::get_if<ValueGate>(&m.gates[j].when);
            if (a && b && detail::could_fire_together(*a, *b)) {
                throw InputError("gates '" + describe(m.gates[i]) + "' and '" + describe(m.gates[j]) + "' out of '" +
                                 m.gates[i].from + "' overlap");
            }
        }
    return m;
}

inline GatedModel load_gated(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), 1);
    }
    return load_gated_json(doc);
}

/// Draws n rows from the context's SEM, optionally under an intervention.
inline Event sample_event(const GatedModel& m, const std::string& ctx, int n, std::uint64_t seed,
                          const std::map<std::string, double>& intervention = {}) {
    const Context& c = m.context(ctx);
    if (!c.sem) throw ConfigurationError("context '" + ctx + "' has no SEM to sample from");
    std::map<int, double> values;
    for (const auto& [k, v] : intervention) values[c.graph.index(k)] = v;
    const GaussianDist d = values.empty() ? implied_distribution(*c.sem) : interventional_distribution(*c.sem, values);
    Event e;
    e.kind = Event::Kind::data;
    for (int v : d.vars) e.columns.push_back(c.graph.label(v));
    e.rows = sample(d, n, seed);
    return e;
}

/// One event per JSON object:
///   {"observe": {"B": 5}}
///   {"intervene": {"A": 1}, "mechanism": "bootcamp"}
///   {"data": {"columns": ["B","Y"], "rows": [[...], ...]}}
///   {"sample": {"context": "R3", "n": 10000, "seed": 1}}
inline Event parse_event(const nlohmann::json& j, const GatedModel& m, std::uint64_t default_seed = 0) {
    auto values = [](const nlohmann::json& obj) {
        std::map<std::string, double> out;
        for (const auto& [k, v] : obj.items()) {
            const double x = v.get<double>();
            if (!std::isfinite(x)) throw InputError("event values must be finite");
            out[k] = x;
        }
        return out;
    };
    Event e;
    if (j.contains("observe")) {
        e.kind = Event::Kind::observe;
        e.values = values(j.at("observe"));
    } else if (j.contains("intervene")) {
        e.kind = Event::Kind::intervene;
        e.values = values(j.at("intervene"));
        if (j.contains("mechanism")) e.mechanism = j.at("mechanism").get<std::string>();
    } else if (j.contains("data")) {
        e.kind = Event::Kind::data;
        const auto& d = j.at("data");
        e.columns = d.at("columns").get<std::vector<std::string>>();
        const auto& rows = d.at("rows");
        e.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(e.columns.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != e.columns.size()) throw InputError("data row has the wrong length");
            for (std::size_t c = 0; c < e.columns.size(); ++c) {
                const double x = rows[r][c].get<double>();
                if (!std::isfinite(x)) throw InputError("data values must be finite");
                e.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = x;
            }
        }
    } else if (j.contains("sample")) {
        const auto& s = j.at("sample");
        std::map<std::string, double> doing;
        if (s.contains("do")) doing = values(s.at("do"));
        e = sample_event(m, s.at("context").get<std::string>(), s.at("n").get<int>(), s.value("seed", static_cast<unsigned long long>(default_seed)), doing);
    } else {
        throw InputError("unknown event " + j.dump());
    }
    return e;
}

inline std::vector<Event> parse_events(std::string_view text, const GatedModel& m, std::uint64_t default_seed = 0) {
    std::vector<Event> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (detail::trim(line).empty() || detail::trim(line)[0] == '#') continue;
        try {
            out.push_back(parse_event(nlohmann::json::parse(line), m, default_seed));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(e.what(), no);
        } catch (const InputError& e) {
            throw ParseError(e.what(), no);
        }
    }
    return out;
}

/// Log-likelihood of a data batch under a context.
inline double context_loglik(const Context& c, const Event& batch, bool refit) {
    std::vector<int> cols;
    for (const auto& name : batch.columns) {
        auto v = c.graph.find(name);
        if (!v) throw InputError("data column '" + name + "' is not a variable of context '" + c.name + "'");
        cols.push_back(*v);
    }
    if (NodeSet::of(cols) != c.graph.nodes() || cols.size() != batch.columns.size()) {
        throw InputError("data must have exactly one column per variable of context '" + c.name + "'");
    }
    if (refit) return loglik_refit(c.graph, cols, batch.rows);
    if (!c.sem) throw ConfigurationError("likelihood gate needs SEM parameters for context '" + c.name + "'");
    const GaussianDist d = implied_distribution(*c.sem);
    Eigen::MatrixXd ordered(batch.rows.rows(), d.dim());
    for (int k = 0; k < d.dim(); ++k) {
        const auto pos = std::find(cols.begin(), cols.end(), d.vars[k]) - cols.begin();
        ordered.col(k) = batch.rows.col(pos);
    }
    return loglik(d, ordered);
}

/// Log-likelihood ratio minus log threshold; the gate fires when positive.
inline double likelihood_margin(const GatedModel& m, const LikelihoodGate& l, const Event& batch) {
    return context_loglik(m.context(l.numerator), batch, l.refit) -
           context_loglik(m.context(l.denominator), batch, l.refit) - std::log(l.theta);
}

inline GateState start(const GatedModel& m) { return GateState{m.initial, {}, 0}; }

/// Advances the state by one event. Observations and interventions only
/// consult value gates; data batches only likelihood gates, and among several
/// firing likelihood gates the largest margin wins (exact ties stay put).
inline GateState step(const GatedModel& m, GateState state, const Event& e) {
    m.context(state.context);
    const int index = state.events_seen++;
    std::optional<std::size_t> chosen;
    if (e.kind == Event::Kind::data) {
        double best = 0.0;
        bool tie = false;
        for (std::size_t i = 0; i < m.gates.size(); ++i) {
            const Gate& g = m.gates[i];
            const auto* l = std::get_if<LikelihoodGate>(&g.when);
            if (g.from != state.context || !l) continue;
            const double margin = likelihood_margin(m, *l, e);
            if (margin > best) {
                best = margin;
                chosen = i;
                tie = false;
            } else if (chosen && margin == best) {
                tie = true;
            }
        }
        if (tie) chosen.reset();
    } else {
        for (std::size_t i = 0; i < m.gates.size(); ++i) {
            const Gate& g = m.gates[i];
            const auto* v = std::get_if<ValueGate>(&g.when);
            if (g.from != state.context || !v) continue;
            auto it = e.values.find(v->var);
            if (it == e.values.end()) continue;
            if (v->mode == GateMode::intervened) {
                if (e.kind != Event::Kind::intervene) continue;
                if (v->mechanism && e.mechanism != v->mechanism) continue;
            }
            if (!v->holds(it->second)) continue;
            if (chosen) {
                throw InputError("event fires both '" + describe(m.gates[*chosen]) + "' and '" + describe(g) + "'");
            }
            chosen = i;
        }
    }
    if (chosen) {
        const Gate& g = m.gates[*chosen];
        state.log.push_back({index, state.context, g.to, describe(g)});
        state.context = g.to;
    }
    return state;
}

inline GateState run_events(const GatedModel& m, const std::vector<Event>& events) {
    GateState s = start(m);
    for (const auto& e : events) s = step(m, std::move(s), e);
    return s;
}

struct ContextIdentification {
    std::string context;
    IdentificationResult result;
};

/// aADMG contexts get every criterion; contexts with bidirected edges get the
/// calculus and the back-door criterion only.
inline ContextIdentification identify_in_context(const GatedModel& m, const std::string& ctx, const EffectQuery& q) {
    const Context& c = m.context(ctx);
    if (c.graph.has_undirected_edges() && c.graph.has_bidirected_edges()) {
        throw UnsupportedExpression("context '" + ctx + "' mixes undirected and bidirected edges");
    }
    IdentifyOptions opt;
    const bool full = c.family == Subfamily::aadmg || c.family == Subfamily::ug || c.family == Subfamily::amp_cg ||
                      (c.family == Subfamily::admg && !c.graph.has_bidirected_edges());
    if (!full) {
        opt.frontdoor = false;
        opt.decomposition = false;
        opt.multi = false;
    }
    return {ctx, identify(c.graph, q, opt)};
}

inline ContextIdentification identify_in_context(const GatedModel& m, const std::string& ctx,
                                                 const std::vector<std::string>& y, const std::vector<std::string>& x,
                                                 const std::vector<std::string>& given = {}) {
    const Admg& g = m.context(ctx).graph;
    return identify_in_context(m, ctx, EffectQuery{g.set_of(y), g.set_of(x), g.set_of(given), std::nullopt});
}

} // namespace admg

#endif // ADMG_GATED_HPP
