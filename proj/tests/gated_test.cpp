#include <gtest/gtest.h>

#include <random>

#include "admg/gated.hpp"
#include "oracle_support.hpp"
#include "support.hpp"

using namespace admg;
using testing_support::data_path;
using testing_support::read_file;

namespace {

GatedModel fixture(const std::string& name) { return load_gated(read_file(data_path(name + "_gated.json"))); }

std::vector<std::string> trajectory(const GatedModel& m, const std::vector<Event>& events) {
    std::vector<std::string> out;
    GateState s = start(m);
    for (const auto& e : events) {
        s = step(m, s, e);
        out.push_back(s.context);
    }
    return out;
}

std::vector<std::string> scripted(const std::string& name) {
    auto m = fixture(name);
    return trajectory(m, parse_events(read_file(data_path(name + "_events.jsonl")), m));
}

Event intervene(const std::string& var, double v, std::optional<std::string> mech = std::nullopt) {
    Event e;
    e.kind = Event::Kind::intervene;
    e.values[var] = v;
    e.mechanism = std::move(mech);
    return e;
}

nlohmann::json two_context_doc() {
    return nlohmann::json::parse(R"({
      "contexts": {
        "P": {"graph": "nodes A B\nA -> B\n", "family": "dag"},
        "Q": {"graph": "nodes A B\n", "family": "dag"}
      },
      "gates": [{"from": "P", "to": "Q", "when": {"var": "A", "op": ">", "value": 0}}],
      "initial": "P"
    })");
}

} // namespace

TEST(GatedLoad, BundledFixturesLoad) {
    for (const char* name : {"fig3", "fig10b", "fig11", "fig12", "fig13"}) {
        auto m = fixture(name);
        EXPECT_FALSE(m.contexts.empty()) << name;
        EXPECT_TRUE(m.contexts.count(m.initial)) << name;
    }
    auto m = fixture("fig3");
    EXPECT_EQ(m.contexts.at("aADMG").family, Subfamily::aadmg);
    EXPECT_EQ(describe(m.gates[0]), "do(A) <= 0");
    EXPECT_EQ(describe(fixture("fig12").gates[0]), "do(W) > 30 | bootcamp");
}

TEST(GatedLoad, RejectsBadDocuments) {
    auto doc = two_context_doc();
    EXPECT_NO_THROW(load_gated_json(doc));

    auto bad = doc;
    bad["gates"][0]["to"] = "Nowhere";
    EXPECT_THROW(load_gated_json(bad), InputError);

    bad = doc;
    bad["initial"] = "Nowhere";
    EXPECT_THROW(load_gated_json(bad), InputError);

    bad = doc;
    bad["contexts"]["P"]["graph"] = "nodes A B\nA <-> B\n";
    bad["contexts"]["P"]["family"] = "aadmg";
    EXPECT_THROW(load_gated_json(bad), InputError);

    bad = doc;
    bad["gates"].push_back({{"from", "P"}, {"to", "Q"}, {"when", {{"var", "A"}, {"op", ">="}, {"value", 5}}}});
    EXPECT_THROW(load_gated_json(bad), InputError);

    bad = doc;
    bad["gates"].push_back({{"from", "P"}, {"to", "Q"}, {"when", {{"var", "A"}, {"op", "<="}, {"value", 0}}}});
    EXPECT_NO_THROW(load_gated_json(bad));

    bad = doc;
    bad["gates"][0]["when"]["var"] = "C";
    EXPECT_THROW(load_gated_json(bad), InputError);

    bad = doc;
    bad["gates"][0]["when"] = {{"ratio", {"P", "Q"}}, {"theta", -1}};
    EXPECT_THROW(load_gated_json(bad), InputError);

    bad = doc;
    bad.erase("initial");
    EXPECT_THROW(load_gated_json(bad), InputError);
    EXPECT_THROW(load_gated(std::string_view("{not json")), ParseError);
}

TEST(GatedLoad, SingleContextIsStatic) {
    auto m = load_gated(std::string_view(R"({"contexts": {"only": {"graph": "nodes A B C\nA -> B\nA -- C\nB -- C\n"}}})"));
    EXPECT_EQ(m.initial, "only");
    auto s = step(m, start(m), intervene("A", 3.0));
    EXPECT_EQ(s.context, "only");
    auto direct = identify(m.context("only").graph, EffectQuery{NodeSet{1}, NodeSet{0}, {}, std::nullopt});
    auto via = identify_in_context(m, "only", {"B"}, {"A"});
    EXPECT_EQ(via.result.render(m.context("only").graph), direct.render(m.context("only").graph));
    EXPECT_EQ(via.context, "only");
}

TEST(GatedStep, Fig3FollowsInterventionSign) {
    EXPECT_EQ(scripted("fig3"),
              (std::vector<std::string>{"aADMG", "oADMG", "oADMG", "oADMG", "aADMG", "oADMG", "aADMG"}));
    auto m = fixture("fig3");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    GateState s = start(m);
    for (int i = 0; i < 500; ++i) {
        const double a = i % 7 == 0 ? 0.0 : u(rng);
        s = step(m, s, intervene("A", a));
        EXPECT_EQ(s.context, a > 0 ? "aADMG" : "oADMG");
    }
}

TEST(GatedStep, Fig3ContextsIdentifyTheEffect) {
    auto m = fixture("fig3");
    auto a = identify_in_context(m, "aADMG", {"B"}, {"A"});
    EXPECT_EQ(a.result.render(m.context("aADMG").graph), "identified (back-door): sum_c p(B|A,c) p(c)");
    auto o = identify_in_context(m, "oADMG", {"B"}, {"A"});
    EXPECT_EQ(o.result.render(m.context("oADMG").graph), "identified (calculus): p(B|A)");
    for (const auto& [ctx, r] : {std::pair{std::string("aADMG"), a}, std::pair{std::string("oADMG"), o}}) {
        const auto& c = m.context(ctx);
        auto gap = testing_support::oracle_gap(c.sem->system(), r.result, c.graph.set_of({"B"}), c.graph.set_of({"A"}), {}, 1);
        EXPECT_LT(gap.worst(), 1e-9) << ctx;
    }
}

TEST(GatedStep, Fig10bVerdictsAndTransitions) {
    EXPECT_EQ(scripted("fig10b"), (std::vector<std::string>{"R1", "R2", "R2", "R2", "R1"}));
    auto m = fixture("fig10b");
    auto r1 = identify_in_context(m, "R1", {"A", "C"}, {"T"});
    EXPECT_EQ(r1.result.verdict, Verdict::not_identified);
    EXPECT_EQ(r1.result.render(m.context("R1").graph), "not identified (strengthened): witness T -- C");
    auto r2 = identify_in_context(m, "R2", {"A", "C"}, {"T"});
    ASSERT_TRUE(r2.result.identified());
    const Admg& g = m.context("R2").graph;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto sem = random_sem(g, seed);
        auto gap = testing_support::oracle_gap(sem.system(), r2.result, g.set_of({"A", "C"}), g.set_of({"T"}), {}, seed);
        EXPECT_LT(gap.worst(), 1e-8);
    }
}

TEST(GatedStep, Fig13VerdictsAndTrajectory) {
    EXPECT_EQ(scripted("fig13"), (std::vector<std::string>{"R1", "R2", "R3", "R2", "R1"}));
    auto m = fixture("fig13");
    EXPECT_EQ(identify_in_context(m, "R1", {"A", "C"}, {"T"}).result.verdict, Verdict::not_identified);
    EXPECT_TRUE(identify_in_context(m, "R2", {"A", "C"}, {"T"}).result.identified());
    EXPECT_EQ(identify_in_context(m, "R3", {"A", "C"}, {"T"}).result.verdict, Verdict::not_identified);
}

TEST(GatedStep, Fig11ObservedGateAlsoSeesInterventions) {
    EXPECT_EQ(scripted("fig11"), (std::vector<std::string>{"R1", "R2", "R3", "R2", "R1"}));
}

TEST(GatedStep, Fig12MechanismMustMatch) {
    EXPECT_EQ(scripted("fig12"), (std::vector<std::string>{"R1", "R2", "R2", "R1"}));
    auto m = fixture("fig12");
    EXPECT_EQ(step(m, start(m), intervene("W", 50)).context, "R1");
}

TEST(GatedStep, LikelihoodGatesPickTheGeneratingContext) {
    auto m = fixture("fig13");
    int hits = 0;
    const int seeds = 25;
    for (int seed = 0; seed < seeds; ++seed) {
        GateState s{"R2", {}, 0};
        hits += step(m, s, sample_event(m, "R3", 10000, seed)).context == "R3";
        s = GateState{"R3", {}, 0};
        hits += step(m, s, sample_event(m, "R2", 10000, 1000 + seed)).context == "R2";
    }
    EXPECT_GE(hits, static_cast<int>(0.99 * 2 * seeds));
}

TEST(GatedStep, DataBatchesIgnoreValueGatesAndViceVersa) {
    auto m = fixture("fig13");
    GateState s{"R2", {}, 0};
    Event obs;
    obs.kind = Event::Kind::observe;
    obs.values["W"] = 45;
    EXPECT_EQ(step(m, s, obs).context, "R2");
    auto batch = sample_event(m, "R2", 500, 4);
    s = GateState{"R1", {}, 0};
    EXPECT_EQ(step(m, s, batch).context, "R1");
}

TEST(GatedStep, MissingSemIsAConfigurationError) {
    auto doc = two_context_doc();
    doc["gates"][0]["when"] = {{"ratio", {"Q", "P"}}, {"theta", 2.0}};
    auto m = load_gated_json(doc);
    Event e;
    e.kind = Event::Kind::data;
    e.columns = {"A", "B"};
    e.rows = Eigen::MatrixXd::Random(50, 2);
    EXPECT_THROW(step(m, start(m), e), ConfigurationError);
    doc["gates"][0]["when"]["refit"] = true;
    EXPECT_NO_THROW(step(load_gated_json(doc), start(m), e));
}

TEST(GatedStep, EqualLikelihoodsStayPut) {
    auto doc = nlohmann::json::parse(read_file(data_path("fig13_gated.json")));
    doc["gates"] = {{{"from", "R1"}, {"to", "R3"}, {"when", {{"ratio", {"R3", "R1"}}, {"theta", 1.0}}}}};
    auto m = load_gated_json(doc);
    EXPECT_EQ(step(m, start(m), sample_event(m, "R3", 1000, 2)).context, "R1");
}

TEST(GatedStep, RefitDifferenceSurvivesAffineMaps) {
    auto m = fixture("fig13");
    LikelihoodGate l{"R3", "R2", 1.0, true};
    auto batch = sample_event(m, "R3", 2000, 9);
    const double base = likelihood_margin(m, l, batch);
    Event moved = batch;
    for (int c = 0; c < moved.rows.cols(); ++c) moved.rows.col(c) = moved.rows.col(c) * (-2.5) + Eigen::VectorXd::Constant(moved.rows.rows(), 1.0 + c);
    EXPECT_NEAR(likelihood_margin(m, l, moved), base, 1e-6 * std::max(1.0, std::abs(base)));
}

TEST(GatedStep, DeterministicTrajectories) {
    auto m = fixture("fig11");
    auto events = parse_events(read_file(data_path("fig11_events.jsonl")), m);
    auto a = run_events(m, events);
    auto b = run_events(m, events);
    ASSERT_EQ(a.log.size(), b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        EXPECT_EQ(a.log[i].to, b.log[i].to);
        EXPECT_EQ(a.log[i].event, b.log[i].event);
    }
    EXPECT_EQ(a.log.size(), 4u);
}

TEST(GatedIdentify, MixedContextsAreUnsupported) {
    auto doc = two_context_doc();
    doc["contexts"]["P"]["graph"] = "nodes A B C\nA -> B\nA -- C\nB <-> C\n";
    doc["contexts"]["P"]["family"] = "admg";
    auto m = load_gated_json(doc);
    EXPECT_THROW(identify_in_context(m, "P", {"B"}, {"A"}), UnsupportedExpression);
}

TEST(GatedIdentify, StrengthenedWitnessIsOverriddenOnlyWithOracleSupport) {
    std::mt19937_64 rng(8);
    int witnessed = 0;
    for (int trial = 0; trial < 60; ++trial) {
        auto g = testing_support::random_admg(4, rng, {0.4, 0.4, 0.0});
        nlohmann::json doc = {{"contexts", {{"c", {{"graph", serialize_graph(g)}, {"family", "aadmg"}}}}}};
        auto m = load_gated_json(doc);
        for (int x : g.nodes()) {
            const NodeSet y = g.nodes().without(x);
            auto w = not_identifiable_by_subset(g, NodeSet{}, y.with(x), x);
            if (!w) continue;
            ++witnessed;
            auto r = identify_in_context(m, "c", EffectQuery{y, NodeSet::single(x), {}, std::nullopt}).result;
            if (!r.identified()) {
                EXPECT_EQ(r.criterion, "strengthened");
                continue;
            }
            EXPECT_FALSE(r.note.empty());
            for (std::uint64_t seed = 0; seed < 3; ++seed) {
                auto sem = random_sem(g, seed);
                EXPECT_LT(testing_support::oracle_gap(sem.system(), r, y, NodeSet::single(x), {}, seed).worst(), 1e-8)
                    << serialize_graph(g);
            }
        }
    }
    EXPECT_GT(witnessed, 20);
}
