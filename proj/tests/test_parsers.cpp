#include <doctest.h>

#include "pnreach/parsers.hpp"
#include "support.hpp"

using namespace pnreach;
using namespace pnreach::test;

namespace {

std::string pnml(const std::string& body) {
    return "<?xml version=\"1.0\"?>\n<pnml xmlns=\"http://www.pnml.org/version-2009/grammar/pnml\">"
           "<net id=\"n\" type=\"http://www.pnml.org/version-2009/grammar/ptnet\"><page id=\"pg\">" +
           body + "</page></net></pnml>";
}

std::string properties(const std::string& formulas) {
    return "<?xml version=\"1.0\"?>\n<property-set xmlns=\"http://mcc.lip6.fr/\">" + formulas + "</property-set>";
}

std::string property(const std::string& id, const std::string& formula) {
    return "<property><id>" + id + "</id><description>x</description><formula>" + formula + "</formula></property>";
}

std::string ef_xml(const std::string& body) { return "<exists-path><finally>" + body + "</finally></exists-path>"; }
std::string ag_xml(const std::string& body) { return "<all-paths><globally>" + body + "</globally></all-paths>"; }
std::string tokens(const std::string& p) { return "<tokens-count><place>" + p + "</place></tokens-count>"; }
std::string constant(int c) { return "<integer-constant>" + std::to_string(c) + "</integer-constant>"; }

std::string parse_error_where(const std::function<void()>& f) {
    try {
        f();
    } catch (const ParseError& e) {
        return e.where();
    }
    FAIL("expected a parse error");
    return "";
}

}  // namespace

TEST_CASE("PNML: one place with an initial marking") {
    auto net = parse_pnml(pnml("<place id=\"p\"><initialMarking><text>3</text></initialMarking></place>"));
    CHECK(net.place_count() == 1);
    CHECK(net.transition_count() == 0);
    CHECK(net.initial_marking()[*net.find_place("p")] == 3);
}

TEST_CASE("PNML: arc defaults and errors") {
    auto net = parse_pnml(pnml("<place id=\"p\"/><transition id=\"t\"/><arc id=\"a\" source=\"p\" target=\"t\"/>"
                               "<arc id=\"b\" source=\"t\" target=\"p\"><inscription><text>4</text></inscription></arc>"));
    CHECK(net.pre_weight(0, 0) == 1);
    CHECK(net.post_weight(0, 0) == 4);

    CHECK(parse_error_where([] {
              parse_pnml(pnml("<place id=\"p\"/><place id=\"q\"/><arc id=\"bad\" source=\"p\" target=\"q\"/>"));
          }) == "bad");
    CHECK(parse_error_where([] {
              parse_pnml(pnml("<place id=\"p\"/><transition id=\"t\"/><arc id=\"ghost\" source=\"p\" target=\"u\"/>"));
          }) == "ghost");
    CHECK(parse_error_where([] {
              parse_pnml(pnml("<place id=\"p\"/><transition id=\"t\"/>"
                              "<arc id=\"neg\" source=\"p\" target=\"t\"><inscription><text>-2</text></inscription></arc>"));
          }) == "neg");
    CHECK_THROWS_AS(parse_pnml("<pnml><net id=\"x\"><page"), ParseError);
}

TEST_CASE("PNML: tool-specific sections and nested pages are ignored or flattened") {
    auto net = parse_pnml(pnml("<toolspecific tool=\"nupn\"><size places=\"1\"/></toolspecific>"
                               "<page id=\"inner\"><place id=\"p\"><initialMarking><text>1</text></initialMarking>"
                               "</place></page><transition id=\"t\"/><arc id=\"a\" source=\"p\" target=\"t\"/>"));
    CHECK(net.place_count() == 1);
    CHECK(net.pre_weight(0, 0) == 1);
}

TEST_CASE("textual nets") {
    auto a = parse_net("pl p (1)\ntr t p -> q");
    CHECK(a.place_names() == std::vector<std::string>{"p", "q"});
    CHECK(a.pre_weight(0, 0) == 1);
    CHECK(a.post_weight(0, 1) == 1);
    CHECK(a.initial_marking()[0] == 1);

    auto b = parse_net("pl p (1)\ntr t p -> p*2");
    CHECK(b.pre_weight(0, 0) == 1);
    CHECK(b.post_weight(0, 0) == 2);

    auto bare = parse_net("tr t p -> q");
    CHECK(bare.place_count() == 2);
    CHECK(bare.initial_marking().support_size() == 0);

    auto braces = parse_net("pl {a.b-c} (2) # comment\ntr {t 1} {a.b-c} -> ");
    CHECK(braces.find_place("a.b-c"));
    CHECK(braces.find_transition("t 1"));
}

TEST_CASE("textual nets: errors carry line numbers") {
    CHECK(parse_error_where([] { parse_net("pl p (1)\npl p (2)\n"); }) == "line 2");
    CHECK(parse_error_where([] { parse_net("pl p\ntr t p*0 -> p\n"); }) == "line 2");
    CHECK(parse_error_where([] { parse_net("pl p\n\ntr t p*-1 -> p\n"); }) == "line 3");
    CHECK(parse_error_where([] { parse_net("pl p (1\n"); }) == "line 1");
    CHECK(parse_error_where([] { parse_net("place p\n"); }) == "line 1");
    CHECK(parse_error_where([] { parse_net("tr t p q\n"); }) == "line 1");
}

TEST_CASE("property: serialize round-trips every corpus net") {
    for (const auto& entry : load_corpus()) {
        CAPTURE(entry.name);
        auto again = parse_net(serialize_net(entry.net));
        CHECK(same_structure(again, entry.net));
    }
    auto odd = parse_net("pl {x y} (3)\ntr {a->b} {x y}*2 -> z\n");
    CHECK(same_structure(parse_net(serialize_net(odd)), odd));
}

TEST_CASE("PNML and textual versions of the same net are identical") {
    auto text = load_net(corpus_dir() / "nets" / "NET-A.net");
    auto xml = load_net(corpus_dir() / "copies" / "NET-A.pnml");
    CHECK(same_structure(text, xml));
    for (const auto& entry : load_corpus()) {
        if (entry.path.extension() != ".pnml") continue;
        CAPTURE(entry.name);
        CHECK(same_structure(parse_net(serialize_net(entry.net)), entry.net));
    }
}

TEST_CASE("MCC properties: schema mapping") {
    auto a = net_a();
    auto set = parse_mcc_properties(
        properties(property("f0", ef_xml("<integer-ge>" + tokens("q") + constant(1) + "</integer-ge>")) +
                   property("f1", ag_xml("<is-fireable><transition>t</transition></is-fireable>")) +
                   property("f2", ef_xml("<integer-lt>" + tokens("p") + constant(1) + "</integer-lt>")) +
                   property("f3", ag_xml("<exists-path><finally><is-deadlock/></finally></exists-path>")) +
                   property("f4", ef_xml("<is-deadlock/>")) +
                   property("f5", ef_xml("<integer-gt>" + constant(3) + tokens("p") + "</integer-gt>"))),
        a);
    REQUIRE(set.queries.size() == 5);
    REQUIRE(set.errors.size() == 1);
    CHECK(set.errors[0].id == "f3");

    CHECK(set.queries[0].id == "f0");
    CHECK(set.queries[0].quantifier == Quantifier::EF);
    CHECK(set.queries[0].body == ge("q", 1));

    CHECK(set.queries[1].quantifier == Quantifier::AG);
    CHECK(set.queries[1].body == ge("p", 1));

    // strict comparisons use the integer shift
    CHECK(set.queries[2].body == le("p", 0));
    auto& gt = set.queries[4].body;
    CHECK(gt.kind() == BoolExpr::Kind::Atom);
    for (Tokens p = 0; p < 6; ++p) CHECK(holds(a, {p, 0}, gt) == (3 > p));

    CHECK(set.queries[3].body == deadlock_formula(a));
}

TEST_CASE("MCC properties: unknown places are per-property errors") {
    auto set = parse_mcc_properties(
        properties(property("bad", ef_xml("<integer-ge>" + tokens("zz") + constant(1) + "</integer-ge>")) +
                   property("good", ef_xml("<integer-ge>" + tokens("q") + constant(1) + "</integer-ge>"))),
        net_a());
    CHECK(set.queries.size() == 1);
    REQUIRE(set.errors.size() == 1);
    CHECK(set.errors[0].id == "bad");
}

TEST_CASE("MCC properties: the whole corpus parses") {
    std::size_t total = 0;
    for (const auto& entry : load_corpus()) total += entry.queries.size();
    CHECK(total >= 100);
}

TEST_CASE("reduction systems") {
    auto one = parse_reduction_system("# reduced places: a\na = p + q\n", {"p", "q"});
    CHECK(one.reduced_places == std::vector<std::string>{"a"});
    REQUIRE(one.equations.size() == 1);
    CHECK(one.equations[0].lhs == LinearExpr::place("a"));
    CHECK(one.equations[0].rhs == sum({"p", "q"}));
    CHECK(one.removed_places() == std::vector<std::string>{"p", "q"});

    auto constant_place = parse_reduction_system("p = 1\n", {"p"});
    REQUIRE(constant_place.equations.size() == 1);
    CHECK(constant_place.equations[0].rhs == LinearExpr(1));
    CHECK(constant_place.reduced_places.empty());

    CHECK_THROWS_AS(parse_reduction_system("x = y\n", {"p"}), ParseError);
    CHECK_THROWS_AS(parse_reduction_system("p * p = 1\n", {"p"}), ParseError);

    auto weighted = parse_reduction_system("# reduced places: x\n2*p + q*3 - 1 = x + 4\n", {"p", "q"});
    auto back = parse_reduction_system(serialize_reduction_system(weighted), {"p", "q"});
    REQUIRE(back.equations.size() == 1);
    CHECK(back.reduced_places == weighted.reduced_places);
    CHECK(back.equations[0].lhs - back.equations[0].rhs == weighted.equations[0].lhs - weighted.equations[0].rhs);
}
