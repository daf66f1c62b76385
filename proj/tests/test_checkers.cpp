#include <doctest.h>

#include "pnreach/certificates.hpp"
#include "pnreach/checkers.hpp"
#include "pnreach/reducer.hpp"
#include "pnreach/scheduler.hpp"
#include "support.hpp"

using namespace pnreach;
using namespace pnreach::test;
using namespace std::chrono_literals;

namespace {

std::optional<Verdict> run(Technique t, const PetriNet& net, const Query& q, MethodOptions o = {},
                           const ReducedInput* r = nullptr, std::chrono::milliseconds budget = 10s) {
    return run_method(t, net, q, budget, o, r);
}

ReducedInput reduced(const PetriNet& net) {
    auto r = reduce(net);
    return {std::move(r.net), std::move(r.system)};
}

std::vector<std::string> names(const PetriNet& net, const Trace& t) {
    std::vector<std::string> out;
    for (auto id : t.transitions) out.push_back(net.transition_name(id));
    return out;
}

// Every piece of evidence is checked against the oracle semantics.
void check_evidence(const PetriNet& net, const Query& q, const Verdict& v, const ReducedInput* r = nullptr) {
    CHECK(respects_semi_decision(v));
    const BoolExpr goal = normalize(q).formula;
    if (v.trace && !v.trace_on_reduced_net) {
        Trace again = replay(net, v.trace->transitions);
        CHECK(holds(net, dense(net, again.final_marking()), goal));
    }
    if (v.witness) CHECK(holds(net, dense(net, *v.witness), goal));
    if (v.trace && v.trace_on_reduced_net) {
        REQUIRE(r);
        CHECK_NOTHROW(replay(r->net, v.trace->transitions));
    }
}

}  // namespace

TEST_CASE("technique labels") {
    CHECK(label(Technique::KInduction) == "K_INDUCTION");
    CHECK(parse_technique("k-induction") == Technique::KInduction);
    CHECK(parse_technique("State_Equation") == Technique::StateEquation);
    CHECK_FALSE(parse_technique("magic"));
    for (auto t : all_techniques) CHECK(parse_technique(label(t)) == t);
}

TEST_CASE("INDUCTION") {
    auto a = net_a();
    auto q = ag(atom(sum({"p", "q"}), Comparison::Eq, 1));
    auto v = run(Technique::Induction, a, q);
    REQUIRE(v);
    CHECK(v->answer);
    REQUIRE(v->certificate);
    for (Tokens p = 0; p < 4; ++p)
        for (Tokens r = 0; r < 4; ++r)
            CHECK(holds(a, {p, r}, v->certificate->invariant) == (p + r == 1));
    CHECK(check_invariant_certificate(a, q, v->certificate->invariant, solver()));

    auto trivial = run(Technique::Induction, a, ag(ge("p", 0)));
    REQUIRE(trivial);
    CHECK(trivial->answer);

    CHECK_FALSE(run(Technique::Induction, net_b(), ag(le("p", 5))));

    // goal true at m0
    auto now = run(Technique::Induction, a, ef(ge("p", 1)));
    REQUIRE(now);
    CHECK(now->answer);
    CHECK(now->trace->length() == 0);
}

TEST_CASE("BMC") {
    auto a = net_a();
    auto v = run(Technique::Bmc, a, ef(ge("q", 1)));
    REQUIRE(v);
    CHECK(v->answer);
    CHECK(names(a, *v->trace) == std::vector<std::string>{"t"});

    auto b = net_b();
    auto vb = run(Technique::Bmc, b, ef(ge("p", 3)));
    REQUIRE(vb);
    CHECK(names(b, *vb->trace) == std::vector<std::string>{"t", "t"});
    check_evidence(b, ef(ge("p", 3)), *vb);

    // p + q = 1 forever: BMC keeps deepening until stopped
    auto start = std::chrono::steady_clock::now();
    CHECK_FALSE(run(Technique::Bmc, a, ef(atom(sum({"p", "q"}), Comparison::Ge, 2)), {}, nullptr, 400ms));
    CHECK(std::chrono::steady_clock::now() - start < 2s);

    MethodOptions bounded;
    bounded.bmc_max_depth = 2;
    CHECK_FALSE(run(Technique::Bmc, b, ef(ge("p", 5)), bounded));
}

TEST_CASE("BMC on a reduced net carries an original witness") {
    auto a = net_a();
    auto r = reduced(a);
    auto q = ef(ge("q", 1));
    auto v = run(Technique::Bmc, a, q, {}, &r);
    REQUIRE(v);
    CHECK(v->answer);
    CHECK(v->trace_on_reduced_net);
    REQUIRE(v->witness);
    check_evidence(a, q, *v, &r);
    CHECK(check_verdict(a, q, *v, &r, solver()));
}

TEST_CASE("K_INDUCTION") {
    auto a = net_a();
    auto sum1 = ag(atom(sum({"p", "q"}), Comparison::Eq, 1));
    auto v = run(Technique::KInduction, a, sum1);
    REQUIRE(v);
    CHECK(v->answer);
    REQUIRE(v->certificate);
    CHECK(v->certificate->kind == Certificate::Kind::KInductionObligation);
    CHECK(v->certificate->depth == 0);

    auto le1 = run(Technique::KInduction, a, ag(le("p", 1)));
    REQUIRE(le1);
    CHECK(le1->answer);
    CHECK(le1->certificate->depth <= 1);
    CHECK(check_obligation_script(le1->certificate->obligation, solver()));

    auto b = net_b();
    auto vb = run(Technique::KInduction, b, ag(le("p", 2)));
    REQUIRE(vb);
    CHECK_FALSE(vb->answer);
    CHECK(names(b, *vb->trace) == std::vector<std::string>{"t", "t"});
}

TEST_CASE("PDR") {
    auto a = net_a();
    auto q = ag(!ge("q", 2));
    auto v = run(Technique::Pdr, a, q);
    REQUIRE(v);
    CHECK(v->answer);
    REQUIRE(v->certificate);
    CHECK(check_invariant_certificate(a, ag(le("q", 1)), v->certificate->invariant, solver()));

    auto b = net_b();
    auto vb = run(Technique::Pdr, b, ef(ge("p", 4)));
    REQUIRE(vb);
    CHECK(vb->answer);
    CHECK(vb->trace->length() == 3);
    check_evidence(b, ef(ge("p", 4)), *vb);

    auto d = net_d();
    auto vd = run(Technique::Pdr, d, ag(!atom(sum({"a", "b"}), Comparison::Ge, 3)));
    REQUIRE(vd);
    CHECK(vd->answer);

    // equality goals are not upward closed
    CHECK_FALSE(run(Technique::Pdr, a, ef(eq("q", 1))));
}

TEST_CASE("STATE_EQUATION") {
    auto d = net_d();
    auto q = ag(ge("a", 1));
    auto v = run(Technique::StateEquation, d, q);
    REQUIRE(v);
    CHECK(v->answer);

    CheckContext ctx{d, q, solver(), {}, {}, nullptr};
    auto report = checkers::refine_state_equation(ctx, normalize(q).formula);
    CHECK(report.plain_sat);
    CHECK(report.status == checkers::StateEquationReport::Status::Unreachable);
    REQUIRE(report.traps.size() == 1);
    CHECK(report.traps[0] == std::vector<PlaceId>{0, 1});
    CHECK(report.iterations <= 2);

    auto a = net_a();
    auto sa = ag(atom(sum({"p", "q"}), Comparison::Eq, 1));
    CheckContext ca{a, sa, solver(), {}, {}, nullptr};
    auto ra = checkers::refine_state_equation(ca, normalize(sa).formula);
    CHECK(ra.status == checkers::StateEquationReport::Status::Unreachable);
    CHECK(ra.traps.empty());
    CHECK_FALSE(ra.plain_sat);

    CHECK_FALSE(run(Technique::StateEquation, net_b(), ef(ge("p", 3))));
}

TEST_CASE("STATE_EQUATION respects the trap cap") {
    auto d = net_d();
    MethodOptions none;
    none.trap_cap = 0;
    CHECK_FALSE(run(Technique::StateEquation, d, ag(ge("a", 1)), none));
}

TEST_CASE("RANDOM_WALK") {
    auto a = net_a();
    for (std::uint64_t seed : {0, 1, 42, 977}) {
        MethodOptions o;
        o.walk_seed = seed;
        auto v = run(Technique::RandomWalk, a, ef(ge("q", 1)), o);
        REQUIRE(v);
        CHECK(v->answer);
        CHECK(v->trace->length() == 1);
    }
    MethodOptions bounded;
    bounded.walk_max_steps = 2000;
    CHECK_FALSE(run(Technique::RandomWalk, a, ag(atom(sum({"p", "q"}), Comparison::Eq, 1)), bounded));

    auto start = std::chrono::steady_clock::now();
    CHECK_FALSE(run(Technique::RandomWalk, a, ag(atom(sum({"p", "q"}), Comparison::Eq, 1)), {}, nullptr, 300ms));
    CHECK(std::chrono::steady_clock::now() - start < 1s);
}

TEST_CASE("RANDOM_WALK is reproducible for a seed") {
    auto net = load_net(corpus_dir() / "nets" / "philo3.net");
    auto q = ef(deadlock_formula(net));
    MethodOptions o;
    o.walk_seed = 1234;
    auto v1 = run(Technique::RandomWalk, net, q, o);
    auto v2 = run(Technique::RandomWalk, net, q, o);
    REQUIRE(v1);
    REQUIRE(v2);
    CHECK(v1->trace->transitions == v2->trace->transitions);
    check_evidence(net, q, *v1);
}

TEST_CASE("CP on a fully reduced net") {
    auto c = net_c();
    auto r = reduced(c);
    REQUIRE(r.net.place_count() == 0);
    auto b1 = run(Technique::Cp, c, ef(ge("b", 1)), {}, &r);
    REQUIRE(b1);
    CHECK(b1->answer);
    REQUIRE(b1->witness);
    CHECK(holds(c, dense(c, *b1->witness), ge("b", 1)));

    auto inv = run(Technique::Cp, c, ag(atom(sum({"a", "b"}), Comparison::Eq, 1)), {}, &r);
    REQUIRE(inv);
    CHECK(inv->answer);

    auto a2 = run(Technique::Cp, c, ef(ge("a", 2)), {}, &r);
    REQUIRE(a2);
    CHECK_FALSE(a2->answer);

    CHECK_FALSE(run(Technique::Cp, c, ef(ge("b", 1))));
    auto b = net_b();
    auto rb = reduced(b);
    CHECK_FALSE(run(Technique::Cp, b, ef(ge("p", 3)), {}, &rb));
}

TEST_CASE("ENUMERATION") {
    auto a = net_a();
    auto space = checkers::explore(a, 100);
    CHECK(space.complete);
    CHECK(space.states.size() == 2);
    auto v = run(Technique::Enumeration, a, ef(ge("q", 1)));
    REQUIRE(v);
    CHECK(v->answer);
    auto inv = run(Technique::Enumeration, a, ag(atom(sum({"p", "q"}), Comparison::Eq, 1)));
    REQUIRE(inv);
    CHECK(inv->answer);

    auto b = net_b();
    MethodOptions cap;
    cap.enumeration_state_cap = 100;
    auto vb = run(Technique::Enumeration, b, ef(ge("p", 3)), cap);
    REQUIRE(vb);
    CHECK(vb->answer);
    auto fifty = run(Technique::Enumeration, b, ag(le("p", 50)), cap);
    REQUIRE(fifty);
    CHECK_FALSE(fifty->answer);
    CHECK(fifty->trace->length() == 50);
    CHECK_FALSE(run(Technique::Enumeration, b, ag(le("p", 1000)), cap));
    CHECK_FALSE(checkers::explore(b, 100).complete);

    auto d = net_d();
    CHECK(checkers::explore(d, 10).states.size() == 1);
    auto vd = run(Technique::Enumeration, d, ag(ge("a", 1)));
    REQUIRE(vd);
    CHECK(vd->answer);
}

TEST_CASE("ENUMERATION finds shortest traces") {
    auto net = load_net(corpus_dir() / "nets" / "ring4.net");
    auto reach = reachable_set(net);
    REQUIRE(reach);
    for (PlaceId p = 0; p < net.place_count(); ++p) {
        auto q = ef(ge(net.place_name(p), 1));
        auto v = run(Technique::Enumeration, net, q);
        REQUIRE(v);
        if (!v->answer) continue;
        // Own BFS distance.
        std::map<Vec, int> dist{{dense(net, net.initial_marking()), 0}};
        std::vector<Vec> frontier{dense(net, net.initial_marking())};
        int found = holds(net, frontier[0], q.body) ? 0 : -1;
        for (int depth = 1; found < 0 && !frontier.empty(); ++depth) {
            std::vector<Vec> next;
            for (const auto& m : frontier)
                for (TransitionId t = 0; t < net.transition_count(); ++t) {
                    Marking mk;
                    for (PlaceId k = 0; k < m.size(); ++k) mk.set(k, m[k]);
                    if (!is_enabled(net, mk, t)) continue;
                    Vec n = dense(net, fire(net, mk, t));
                    if (dist.emplace(n, depth).second) next.push_back(n);
                    if (found < 0 && holds(net, n, q.body)) found = depth;
                }
            frontier = std::move(next);
        }
        CHECK(static_cast<int>(v->trace->length()) == found);
    }
}

TEST_CASE("property: methods agree with the oracle on the small nets") {
    std::vector<std::pair<PetriNet, std::vector<Query>>> cases;
    for (const char* name : {"NET-A", "NET-C", "NET-D", "counter"}) {
        auto net = load_net(corpus_dir() / "nets" / (std::string(name) + ".net"));
        auto props = parse_mcc_properties(read_file(corpus_dir() / "properties" / (std::string(name) + ".xml")), net);
        cases.emplace_back(net, props.queries);
    }
    MethodOptions o;
    o.bmc_max_depth = 8;
    o.k_induction_max_depth = 4;
    o.walk_max_steps = 5000;
    for (auto& [net, queries] : cases) {
        auto r = reduced(net);
        for (const auto& q : queries) {
            auto truth = answer(net, q);
            REQUIRE(truth);
            for (auto t : all_techniques) {
                CAPTURE(q.id);
                CAPTURE(label(t));
                auto v = run(t, net, q, o, &r, 3s);
                if (!v) continue;
                CHECK(v->answer == *truth);
                check_evidence(net, q, *v, &r);
            }
        }
    }
}
