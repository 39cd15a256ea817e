#include <gtest/gtest.h>

#include <map>
#include <random>

#include "admg/learn.hpp"
#include "support.hpp"

using namespace admg;
using testing_support::read_file;
using testing_support::data_path;

namespace {

FactSet fig7() { return parse_facts(read_file(data_path("fig7_facts.lp"))); }

Admg numbered(int n, std::initializer_list<std::tuple<char, int, int>> edges) {
    std::vector<std::string> labels;
    for (int i = 1; i <= n; ++i) labels.push_back(std::to_string(i));
    Admg g(labels);
    for (auto [kind, a, b] : edges) {
        if (kind == '>') g.add_directed(a - 1, b - 1);
        if (kind == '-') g.add_undirected(a - 1, b - 1);
        if (kind == '<') g.add_bidirected(a - 1, b - 1);
    }
    return g;
}

// Rules for the post-intervention graph read literally off the logic program,
// with symmetry closed by hand.
Admg literal_regime_graph(const Admg& g, int i) {
    Admg h(g.labels());
    for (auto [x, y] : g.undirected_edges())
        if (x != i && y != i) h.add_undirected(x, y);
    for (int x : g.neighbors(i))
        for (int y : g.neighbors(i))
            if (x < y && !h.has_undirected(x, y)) h.add_undirected(x, y);
    for (auto [x, y] : g.directed_edges())
        if (y != i) h.add_directed(x, y);
    for (auto [x, y] : g.bidirected_edges())
        if (x != i && y != i) h.add_bidirected(x, y);
    return h;
}

std::optional<long> path_score(const Admg& g, const FactSet& facts, const LearnConfig& cfg) {
    long total = edge_penalty(g, cfg);
    for (const auto& f : facts.facts) {
        const Admg h = f.regime < 0 ? g : literal_regime_graph(g, f.regime);
        const bool con = connects_by_path(h, f.x, f.y, f.cond).has_value();
        if (f.dep && !con) return std::nullopt;
        if (!f.dep && con) total += f.weight;
    }
    return total;
}

} // namespace

TEST(Facts, ReadsPredicatesAndRepairsStrayArgument) {
    auto fs = fig7();
    EXPECT_EQ(fs.n, 3);
    EXPECT_EQ(fs.facts.size(), 21u);
    EXPECT_EQ(fs.repairs.size(), 3u);
    EXPECT_EQ(fs.observational().facts.size(), 6u);
    EXPECT_EQ(format_fact_native(fs.facts[11]), "indep 1 2 {} do=2 1");
    EXPECT_EQ(format_fact_native(fs.facts[16]), "dep 1 2 {3} do=3 1");
}

TEST(Facts, NativeFileMatchesPredicates) {
    auto native = parse_facts(read_file(data_path("fig7_facts.txt")));
    EXPECT_EQ(native.facts, fig7().facts);
    EXPECT_TRUE(native.repairs.empty());
    EXPECT_EQ(parse_facts(serialize_facts(native)).facts, native.facts);
}

TEST(Facts, RejectsMalformedInput) {
    EXPECT_THROW(parse_facts("dep 1 2 {} obs 1\n"), ParseError);
    EXPECT_THROW(parse_facts("nodes 3\ndep 1 2 {} obs\n"), ParseError);
    EXPECT_THROW(parse_facts("nodes 3\ndep 1 4 {} obs 1\n"), ParseError);
    EXPECT_THROW(parse_facts("nodes 3\ndep 1 2 {1} obs 1\n"), ParseError);
    EXPECT_THROW(parse_facts("nodes(3).\ndep(1,2,8,0,1).\n"), ParseError);
    EXPECT_THROW(parse_facts("nodes(3).\ndep(1,2,0,1,2,1).\n"), ParseError);
    try {
        parse_facts("nodes 3\n\nindep 1 2 {} do=7 1\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
    }
}

TEST(Facts, EmittedProgramRoundTrips) {
    auto fs = fig7();
    const std::string text = emit_asp(fs);
    EXPECT_NE(text.find(":- dep(X,Y,C,I,W), not con(X,Y,C,I)."), std::string::npos);
    EXPECT_NE(text.find(":~ arrow(X,Y,0). [1,X,Y,2]"), std::string::npos);
    EXPECT_NE(text.find("set(0..7)."), std::string::npos);
    EXPECT_NE(text.find("indep(1,2,4,2,1)."), std::string::npos);
    EXPECT_EQ(parse_facts(text).facts, fs.facts);
    LearnConfig cfg;
    cfg.family = Subfamily::dag;
    cfg.arrow_penalty = 3;
    const std::string dag = emit_asp(fs, cfg);
    EXPECT_NE(dag.find(":~ arrow(X,Y,0). [3,X,Y,2]"), std::string::npos);
    EXPECT_NE(dag.find(":- biarrow(X,Y,0)."), std::string::npos);
}

TEST(GraphSpace, EnumerationCounts) {
    EXPECT_EQ(enumerate_graphs(1, Subfamily::admg).size(), 1u);
    EXPECT_EQ(enumerate_graphs(2, Subfamily::admg).size(), 12u);
    EXPECT_EQ(enumerate_graphs(3, Subfamily::dag).size(), 25u);
    EXPECT_EQ(enumerate_graphs(3, Subfamily::ug).size(), 8u);
    EXPECT_THROW(enumerate_graphs(kMaxLearnNodes + 1, Subfamily::dag), ConfigurationError);
}

TEST(GraphSpace, FamilyEnumerationAgreesWithMembership) {
    const auto all = enumerate_graphs(3, Subfamily::admg);
    for (const auto& [fam, name] : subfamily_names()) {
        std::size_t members = 0;
        for (const auto& g : all) members += in_family(g, fam);
        EXPECT_EQ(enumerate_graphs(3, fam).size(), members) << name;
    }
}

TEST(GraphSpace, ChainGraphConditions) {
    EXPECT_TRUE(in_family(numbered(3, {{'>', 1, 2}, {'-', 2, 3}}), Subfamily::amp_cg));
    EXPECT_FALSE(in_family(numbered(3, {{'>', 1, 2}, {'-', 2, 3}, {'>', 3, 1}}), Subfamily::amp_cg));
    EXPECT_FALSE(in_family(numbered(2, {{'>', 1, 2}, {'-', 1, 2}}), Subfamily::amp_cg));
    EXPECT_FALSE(in_family(numbered(3, {{'>', 1, 2}, {'<', 2, 3}, {'>', 3, 1}}), Subfamily::mvr_cg));
    EXPECT_TRUE(in_family(numbered(3, {{'>', 1, 2}, {'<', 2, 3}}), Subfamily::mvr_cg));
    EXPECT_FALSE(in_family(numbered(2, {{'<', 1, 2}}), Subfamily::amp_cg));
}

TEST(GraphSpace, RegimeGraphMatchesLiteralRules) {
    for (int n = 3; n <= 4; ++n) {
        std::mt19937_64 rng(n);
        for (int trial = 0; trial < 400; ++trial) {
            auto g = testing_support::random_admg(n, rng);
            for (int i = 0; i < n; ++i) {
                EXPECT_EQ(serialize_graph(regime_graph(g, i)), serialize_graph(literal_regime_graph(g, i)));
            }
        }
    }
}

TEST(Learn, ObservationalFactsGive104Optima) {
    auto res = learn(fig7().observational());
    EXPECT_EQ(res.penalty, 3);
    ASSERT_EQ(res.graphs.size(), 104u);
    std::map<std::string, int> count;
    for (const auto& g : res.graphs)
        for (const auto& [fam, name] : subfamily_names())
            if (in_family(g, fam)) ++count[name];
    EXPECT_EQ(count["ug"], 1);
    EXPECT_EQ(count["bg"], 1);
    EXPECT_EQ(count["dag"], 6);
    EXPECT_EQ(count["amp-cg"], 13);
    EXPECT_EQ(count["mvr-cg"], 13);
    EXPECT_EQ(count["oadmg"], 37);
    EXPECT_EQ(count["aadmg"], 37);
}

TEST(Learn, InterventionsLeaveTwoModels) {
    auto fs = fig7();
    auto res = learn(fs);
    EXPECT_EQ(res.penalty, 3);
    ASSERT_EQ(res.graphs.size(), 2u);
    EXPECT_EQ(serialize_graph(res.graphs[0]), serialize_graph(numbered(3, {{'>', 1, 2}, {'>', 2, 3}, {'-', 2, 3}})));
    EXPECT_EQ(serialize_graph(res.graphs[1]), serialize_graph(numbered(3, {{'>', 1, 2}, {'>', 2, 3}, {'<', 2, 3}})));
    auto both = numbered(3, {{'>', 1, 2}, {'>', 2, 3}, {'-', 2, 3}, {'<', 2, 3}});
    EXPECT_EQ(score(both, fs), 4);
    EXPECT_FALSE(score(numbered(3, {{'>', 1, 2}}), fs).has_value());
}

TEST(Learn, ThreadsDoNotChangeTheAnswer) {
    LearnConfig cfg;
    cfg.threads = 3;
    auto a = learn(fig7().observational(), cfg);
    auto b = learn(fig7().observational());
    ASSERT_EQ(a.graphs.size(), b.graphs.size());
    for (std::size_t i = 0; i < a.graphs.size(); ++i)
        EXPECT_EQ(serialize_graph(a.graphs[i]), serialize_graph(b.graphs[i]));
}

TEST(Learn, FamilyRestrictionAndWeights) {
    LearnConfig cfg;
    cfg.family = Subfamily::dag;
    auto res = learn(fig7().observational(), cfg);
    EXPECT_EQ(res.graphs.size(), 6u);
    for (const auto& g : res.graphs) EXPECT_TRUE(in_family(g, Subfamily::dag));
    cfg.family = Subfamily::admg;
    cfg.line_penalty = 0;
    res = learn(fig7().observational(), cfg);
    EXPECT_EQ(res.penalty, 0);
    EXPECT_EQ(serialize_graph(res.graphs[0]), serialize_graph(numbered(3, {{'-', 1, 2}, {'-', 1, 3}, {'-', 2, 3}})));
}

TEST(Learn, InfeasibleFactsAreReported) {
    EXPECT_THROW(learn(parse_facts("nodes 2\ndep 1 2 {} do=1 1\ndep 1 2 {} do=2 1\n")), InfeasibleError);
    LearnConfig cfg;
    cfg.family = Subfamily::ug;
    EXPECT_THROW(learn(parse_facts("nodes 2\ndep 1 2 {} do=1 1\n"), cfg), InfeasibleError);
}

TEST(Learn, MatchesExhaustiveSearchWithPathScorer) {
    std::mt19937_64 rng(17);
    std::bernoulli_distribution flip(0.15);
    std::uniform_int_distribution<long> weight(1, 3);
    const auto families = subfamily_names();
    for (int trial = 0; trial < 24; ++trial) {
        const int n = 2 + trial % 2;
        auto truth = testing_support::random_admg(n, rng);
        FactSet fs = sep_oracle(truth, trial % 3 != 0);
        for (auto& f : fs.facts) {
            if (!f.dep && flip(rng)) f.dep = true;
            else if (f.dep && flip(rng)) f.dep = false;
            f.weight = weight(rng);
        }
        LearnConfig cfg;
        cfg.family = families[trial % families.size()].first;
        cfg.arrow_penalty = 1 + trial % 2;
        std::optional<long> best;
        std::vector<std::string> optima;
        for (const auto& g : enumerate_graphs(n, cfg.family)) {
            auto s = path_score(g, fs, cfg);
            if (!s) continue;
            if (!best || *s < *best) {
                best = s;
                optima.clear();
            }
            if (*s == *best) optima.push_back(serialize_graph(g));
        }
        if (!best) {
            EXPECT_THROW(learn(fs, cfg), InfeasibleError);
            continue;
        }
        auto res = learn(fs, cfg);
        EXPECT_EQ(res.penalty, *best);
        std::vector<std::string> got;
        for (const auto& g : res.graphs) got.push_back(serialize_graph(g));
        std::sort(got.begin(), got.end());
        std::sort(optima.begin(), optima.end());
        EXPECT_EQ(got, optima) << "trial " << trial;
    }
}

TEST(Learn, OracleFactsAreReproduced) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        auto truth = testing_support::random_admg(3, rng).compacted();
        std::vector<std::string> labels{"1", "2", "3"};
        Admg g(labels);
        for (auto [a, b] : truth.directed_edges()) g.add_directed(a, b);
        for (auto [a, b] : truth.undirected_edges()) g.add_undirected(a, b);
        for (auto [a, b] : truth.bidirected_edges()) g.add_bidirected(a, b);
        auto fs = sep_oracle(g);
        auto res = learn(fs);
        EXPECT_LE(res.penalty, edge_penalty(g, {}));
        for (const auto& h : res.graphs) EXPECT_EQ(score(h, fs), res.penalty);
        EXPECT_EQ(*score(g, fs), edge_penalty(g, {}));
    }
}

TEST(Learn, BundledFactsHoldInTheirGeneratingGraph) {
    Admg g(std::vector<std::string>{"1", "2", "3"});
    g.add_directed(0, 1);
    g.add_directed(1, 2);
    g.add_undirected(1, 2);
    auto oracle = sep_oracle(g);
    auto bundled = parse_facts(read_file(data_path("fig7_facts.txt")));
    int observational_deps = 0;
    for (const auto& f : bundled.facts) {
        auto same = [&](const Fact& o) {
            return o.dep == f.dep && o.regime == f.regime && o.cond == f.cond &&
                   ((o.x == f.x && o.y == f.y) || (o.x == f.y && o.y == f.x));
        };
        EXPECT_TRUE(std::any_of(oracle.facts.begin(), oracle.facts.end(), same)) << format_fact_native(f);
        if (f.dep && f.regime < 0) ++observational_deps;
    }
    EXPECT_EQ(observational_deps, 6);
}
