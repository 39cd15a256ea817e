#ifndef ADMG_CLI_HPP
#define ADMG_CLI_HPP

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "admg/dsl.hpp"
#include "admg/error.hpp"
#include "admg/gated.hpp"
#include "admg/graph.hpp"
#include "admg/identify.hpp"
#include "admg/learn.hpp"
#include "admg/sem.hpp"
#include "admg/separation.hpp"
#include "admg/surgery.hpp"

namespace admg::cli {

inline constexpr int kOk = 0;
inline constexpr int kNegative = 1;
inline constexpr int kUsage = 2;

class UsageError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',' || c == ' ') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

inline NodeSet labels_to_set(const Admg& g, const std::string& s) {
    NodeSet out;
    for (const auto& name : split_list(s)) {
        auto v = g.find(name);
        if (!v) throw UsageError("unknown node '" + name + "'");
        out.insert(*v);
    }
    return out;
}

inline std::vector<std::string> set_labels(const Admg& g, NodeSet s) {
    std::vector<std::string> out;
    for (int v : by_label(g, s)) out.push_back(g.label(v));
    return out;
}

inline std::map<std::string, double> parse_assignments(const std::string& s) {
    std::map<std::string, double> out;
    for (const auto& item : split_list(s)) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("expected NAME=VALUE, got '" + item + "'");
        try {
            out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
        } catch (const std::logic_error&) {
            throw UsageError("bad value in '" + item + "'");
        }
    }
    return out;
}

inline nlohmann::json dist_json(const Admg& g, const GaussianDist& d) {
    nlohmann::json j;
    j["vars"] = nlohmann::json::array();
    for (int v : d.vars) j["vars"].push_back(g.label(v));
    j["mean"] = std::vector<double>(d.mean.data(), d.mean.data() + d.mean.size());
    j["cov"] = nlohmann::json::array();
    for (int i = 0; i < d.dim(); ++i) {
        std::vector<double> row;
        for (int k = 0; k < d.dim(); ++k) row.push_back(d.cov(i, k));
        j["cov"].push_back(row);
    }
    return j;
}

inline std::string dist_text(const Admg& g, const GaussianDist& d) {
    std::ostringstream s;
    s << std::setprecision(10);
    s << "vars";
    for (int v : d.vars) s << ' ' << g.label(v);
    s << "\nmean";
    for (int i = 0; i < d.dim(); ++i) s << ' ' << d.mean(i);
    s << "\ncov\n";
    for (int i = 0; i < d.dim(); ++i) {
        for (int k = 0; k < d.dim(); ++k) s << (k ? " " : "") << d.cov(i, k);
        s << '\n';
    }
    return s.str();
}

inline nlohmann::json result_json(const Admg& g, const IdentificationResult& r) {
    nlohmann::json j;
    j["verdict"] = to_string(r.verdict);
    j["criterion"] = r.criterion;
    j["text"] = r.render(g);
    j["estimand"] = r.estimand ? to_json(r.estimand, g.labels()) : nlohmann::json(nullptr);
    j["estimandText"] = r.estimand ? render(r.estimand, g.labels()) : "";
    j["definitions"] = nlohmann::json::array();
    for (const auto& d : r.definitions) {
        std::vector<std::string> targets, context;
        for (int v : d.targets) targets.push_back(g.label(v));
        for (int v : d.context) context.push_back(g.label(v));
        j["definitions"].push_back({{"name", d.name},
                                    {"targets", targets},
                                    {"context", context},
                                    {"text", render(d, g.labels())},
                                    {"expr", to_json(d.expr, g.labels())}});
    }
    j["witness"] = r.witness ? nlohmann::json(r.witness->render(g)) : nlohmann::json(nullptr);
    j["derivation"] = r.derivation;
    j["note"] = r.note;
    return j;
}

struct Common {
    std::string format = "text";
    bool assert_positive = false;
    std::uint64_t seed = 0;
};

inline void add_common(CLI::App* sub, Common& c, bool with_assert, bool with_seed) {
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    if (with_assert) sub->add_flag("--assert", c.assert_positive, "Exit 1 on a negative verdict");
    if (with_seed) sub->add_option("--seed", c.seed, "Random seed");
}

inline void add_learn_config(CLI::App* sub, LearnConfig& cfg, std::string& family) {
    sub->add_option("--family", family, "Graph family")
        ->check(CLI::IsMember({"admg", "oadmg", "aadmg", "amp-cg", "mvr-cg", "dag", "ug", "bg"}));
    sub->add_option("--line-penalty", cfg.line_penalty, "Penalty per undirected edge");
    sub->add_option("--arrow-penalty", cfg.arrow_penalty, "Penalty per directed edge");
    sub->add_option("--biarrow-penalty", cfg.biarrow_penalty, "Penalty per bidirected edge");
}

} // namespace detail

/// Runs the tool on `args` (without the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Acyclic directed mixed graphs: separation, identification, learning and gated models", "admg"};
    app.require_subcommand(1);
    detail::Common common;

    std::string graph_path, x, y, z, criterion = "route", do_set;
    auto* sep = app.add_subcommand("sep", "Test separation of X and Y given Z");
    sep->add_option("graph", graph_path, "Graph file")->required();
    sep->add_option("--x", x, "Comma separated labels")->required();
    sep->add_option("--y", y, "Comma separated labels")->required();
    sep->add_option("--z", z, "Comma separated labels");
    sep->add_option("--criterion", criterion, "path or route")->check(CLI::IsMember({"path", "route"}));
    sep->add_option("--do", do_set, "Intervene on these nodes first");
    detail::add_common(sep, common, true, false);

    auto* mag = app.add_subcommand("magnify", "Print the magnified graph");
    mag->add_option("graph", graph_path, "Graph file")->required();
    detail::add_common(mag, common, false, false);

    auto* itv = app.add_subcommand("intervene", "Print the graph after intervening");
    itv->add_option("graph", graph_path, "Graph file")->required();
    itv->add_option("--do", do_set, "Nodes to intervene on")->required();
    detail::add_common(itv, common, false, false);

    std::string on, given, ancestral;
    bool explain = false;
    auto* idf = app.add_subcommand("identify", "Identify p(on | do(X), given)");
    idf->add_option("graph", graph_path, "Graph file")->required();
    idf->add_option("--do", do_set, "Intervened nodes")->required();
    idf->add_option("--on", on, "Outcome nodes")->required();
    idf->add_option("--given", given, "Conditioning nodes");
    idf->add_option("--ancestral", ancestral, "Observed ancestral set W'");
    idf->add_flag("--explain", explain, "Also print derivation steps and notes");
    detail::add_common(idf, common, true, false);

    std::string facts_path, family = "admg", output;
    LearnConfig cfg;
    bool all_optima = false, observational = false;
    auto* lrn = app.add_subcommand("learn", "Exact learning from (in)dependence facts");
    lrn->add_option("facts", facts_path, "Facts file")->required();
    lrn->add_flag("--all-optima", all_optima, "Print every optimal graph");
    lrn->add_flag("--observational", observational, "Use only the observational facts");
    lrn->add_option("--threads", cfg.threads, "Worker threads");
    detail::add_learn_config(lrn, cfg, family);
    detail::add_common(lrn, common, false, false);

    auto* asp = app.add_subcommand("emit-asp", "Write the logic program for a facts file");
    asp->add_option("facts", facts_path, "Facts file")->required();
    asp->add_option("-o,--output", output, "Output file (stdout when omitted)");
    asp->add_flag("--observational", observational, "Use only the observational facts");
    detail::add_learn_config(asp, cfg, family);

    bool asp_syntax = false;
    auto* orc = app.add_subcommand("oracle", "Facts read off a ground-truth graph");
    orc->add_option("graph", graph_path, "Graph file")->required();
    orc->add_flag("--observational", observational, "Observational regime only");
    orc->add_flag("--asp", asp_syntax, "Write predicate syntax");

    std::string sem_path;
    bool cov = false, truth = false;
    int sample_n = 0;
    auto* semc = app.add_subcommand("sem", "Random or loaded linear Gaussian SEM");
    semc->add_option("graph", graph_path, "Graph file (ignored with --load)");
    semc->add_option("--load", sem_path, "SEM JSON file");
    semc->add_flag("--cov", cov, "Print the implied distribution");
    semc->add_flag("--truth", truth, "Print the interventional distribution for --do");
    semc->add_option("--do", do_set, "Assignments NAME=VALUE[,...]");
    semc->add_option("--sample", sample_n, "Draw this many rows as CSV")->check(CLI::PositiveNumber);
    detail::add_common(semc, common, false, true);

    std::string model_path, events_path;
    auto* gate = app.add_subcommand("gate", "Run an event stream through a gated model");
    gate->add_option("model", model_path, "Gated model JSON")->required();
    gate->add_option("events", events_path, "Event stream, one JSON object per line");
    gate->add_option("--do", do_set, "Intervened nodes for per-context identification");
    gate->add_option("--on", on, "Outcome nodes for per-context identification");
    gate->add_option("--given", given, "Conditioning nodes for per-context identification");
    detail::add_common(gate, common, true, true);

    std::vector<std::string> argv_store{"admg"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }
    const bool json = common.format == "json";

    try {
        if (*sep) {
            Admg g = parse_graph(detail::read_text(graph_path));
            if (!do_set.empty()) g = intervene(g, detail::labels_to_set(g, do_set));
            const auto crit = criterion == "path" ? Criterion::path : Criterion::route;
            auto r = separated(g, detail::labels_to_set(g, x), detail::labels_to_set(g, y), detail::labels_to_set(g, z), crit);
            if (json) {
                out << nlohmann::json{{"separated", r.separated},
                                      {"criterion", criterion},
                                      {"witness", r.witness ? nlohmann::json(r.witness->render(g)) : nlohmann::json(nullptr)}}
                           .dump(2)
                    << '\n';
            } else if (r.separated) {
                out << "separated\n";
            } else {
                out << "connected" << (r.witness ? ": witness " + r.witness->render(g) : std::string()) << '\n';
            }
            return common.assert_positive && !r.separated ? kNegative : kOk;
        }
        if (*mag || *itv) {
            const Admg g = parse_graph(detail::read_text(graph_path));
            const Admg h = *mag ? magnify(g).graph : intervene(g, detail::labels_to_set(g, do_set));
            if (json) out << nlohmann::json{{"graph", serialize_graph(h)}}.dump(2) << '\n';
            else out << serialize_graph(h);
            return kOk;
        }
        if (*idf) {
            const Admg g = parse_graph(detail::read_text(graph_path));
            EffectQuery q{detail::labels_to_set(g, on), detail::labels_to_set(g, do_set), detail::labels_to_set(g, given),
                          std::nullopt};
            if (!ancestral.empty()) q.ancestral = detail::labels_to_set(g, ancestral);
            const auto r = identify(g, q);
            if (json) {
                auto j = detail::result_json(g, r);
                j["query"] = format_query(g, q.y, q.x, q.given);
                out << j.dump(2) << '\n';
            } else {
                out << r.render(g) << '\n';
                if (explain) {
                    for (const auto& step : r.derivation) out << "  " << step << '\n';
                    if (!r.note.empty()) out << "  note: " << r.note << '\n';
                }
            }
            return common.assert_positive && !r.identified() ? kNegative : kOk;
        }
        if (*lrn || *asp) {
            FactSet facts = parse_facts(detail::read_text(facts_path));
            for (const auto& note : facts.repairs) err << "warning: " << note << '\n';
            if (observational) facts = facts.observational();
            cfg.family = parse_subfamily(family);
            if (*asp) {
                const std::string text = emit_asp(facts, cfg);
                if (output.empty()) {
                    out << text;
                } else {
                    std::ofstream f(output);
                    if (!f) throw UsageError("cannot write '" + output + "'");
                    f << text;
                }
                return kOk;
            }
            const auto res = learn(facts, cfg);
            const std::size_t shown = all_optima ? res.graphs.size() : 1;
            if (json) {
                nlohmann::json j{{"penalty", res.penalty}, {"optima", res.graphs.size()}, {"family", family}};
                j["graphs"] = nlohmann::json::array();
                for (std::size_t i = 0; i < shown; ++i) j["graphs"].push_back(serialize_graph(res.graphs[i]));
                out << j.dump(2) << '\n';
            } else {
                out << "penalty " << res.penalty << "\noptima " << res.graphs.size() << '\n';
                for (std::size_t i = 0; i < shown; ++i) out << '\n' << serialize_graph(res.graphs[i]);
            }
            return kOk;
        }
        if (*orc) {
            const Admg g = parse_graph(detail::read_text(graph_path)).compacted();
            const FactSet facts = sep_oracle(g, !observational);
            std::string legend = "nodes:";
            for (int v = 0; v < g.universe(); ++v) legend += " " + std::to_string(v + 1) + "=" + g.label(v);
            if (asp_syntax) {
                out << "% " << legend << "\nnodes(" << facts.n << ").\nset(0.." << ((1L << facts.n) - 1) << ").\n";
                for (const auto& f : facts.facts) out << format_fact_asp(f) << '\n';
            } else {
                out << "# " << legend << '\n' << serialize_facts(facts);
            }
            return kOk;
        }
        if (*semc) {
            GaussianSem sem;
            if (!sem_path.empty()) {
                sem = sem_from_json(nlohmann::json::parse(detail::read_text(sem_path)));
            } else if (!graph_path.empty()) {
                sem = random_sem(parse_graph(detail::read_text(graph_path)), common.seed);
            } else {
                throw UsageError("sem needs a graph file or --load");
            }
            const Admg& g = sem.graph;
            std::map<int, double> values;
            for (const auto& [k, v] : detail::parse_assignments(do_set)) {
                auto idx = g.find(k);
                if (!idx) throw UsageError("unknown node '" + k + "'");
                values[*idx] = v;
            }
            const GaussianDist d = values.empty() ? implied_distribution(sem) : interventional_distribution(sem, values);
            if (sample_n > 0) {
                const Eigen::MatrixXd rows = sample(d, sample_n, common.seed);
                out << std::setprecision(10);
                for (int k = 0; k < d.dim(); ++k) out << (k ? "," : "") << g.label(d.vars[k]);
                out << '\n';
                for (int r = 0; r < rows.rows(); ++r) {
                    for (int k = 0; k < rows.cols(); ++k) out << (k ? "," : "") << rows(r, k);
                    out << '\n';
                }
            } else if (cov || truth || !values.empty()) {
                if (json) out << detail::dist_json(g, d).dump(2) << '\n';
                else out << detail::dist_text(g, d);
            } else {
                out << to_json(sem).dump(2) << '\n';
            }
            return kOk;
        }
        if (*gate) {
            const GatedModel m = load_gated(detail::read_text(model_path));
            std::vector<Event> events;
            if (!events_path.empty()) events = parse_events(detail::read_text(events_path), m, common.seed);
            const GateState s = run_events(m, events);
            std::vector<std::string> visited{m.initial};
            for (const auto& t : s.log)
                if (std::find(visited.begin(), visited.end(), t.to) == visited.end()) visited.push_back(t.to);
            const bool query = !on.empty() || !do_set.empty();
            if (query && (on.empty() || do_set.empty())) throw UsageError("per-context identification needs --do and --on");
            std::vector<ContextIdentification> ids;
            if (query)
                for (const auto& ctx : visited)
                    ids.push_back(identify_in_context(m, ctx, detail::split_list(on), detail::split_list(do_set),
                                                      detail::split_list(given)));
            if (json) {
                nlohmann::json j{{"initial", m.initial}, {"final", s.context}, {"events", s.events_seen}};
                j["transitions"] = nlohmann::json::array();
                for (const auto& t : s.log)
                    j["transitions"].push_back({{"event", t.event}, {"from", t.from}, {"to", t.to}, {"gate", t.gate}});
                j["identification"] = nlohmann::json::array();
                for (const auto& id : ids) {
                    auto r = detail::result_json(m.context(id.context).graph, id.result);
                    r["context"] = id.context;
                    j["identification"].push_back(r);
                }
                out << j.dump(2) << '\n';
            } else {
                out << "start " << m.initial << '\n';
                for (const auto& t : s.log)
                    out << "event " << t.event << ": " << t.from << " -> " << t.to << " (" << t.gate << ")\n";
                out << "final " << s.context << '\n';
                for (const auto& id : ids) out << id.context << ": " << id.result.render(m.context(id.context).graph) << '\n';
            }
            if (common.assert_positive && query) {
                for (const auto& id : ids)
                    if (id.context == s.context && !id.result.identified()) return kNegative;
            }
            return kOk;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

} // namespace admg::cli

#endif // ADMG_CLI_HPP
