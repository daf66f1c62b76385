#include <doctest.h>

#include <sys/stat.h>

#include <fstream>
#include <random>
#include <thread>

#include "pnreach/sexpr.hpp"
#include "pnreach/smt.hpp"
#include "support.hpp"

using namespace pnreach;
using namespace pnreach::smt;
using pnreach::test::eval_smt;

namespace {

// Shell script standing in for a solver; `body` reads commands line by line from stdin.
SolverConfig fake_solver(const std::string& name, const std::string& body) {
    auto path = std::filesystem::temp_directory_path() / ("pnreach-fake-" + name + ".sh");
    {
        std::ofstream out(path);
        out << "#!/bin/sh\n" << body;
    }
    ::chmod(path.c_str(), 0755);
    SolverConfig c;
    c.executable = path.string();
    c.arguments = {};
    return c;
}

std::string random_term(std::mt19937& rng, int depth) {
    const char* vars[] = {"x", "y", "z"};
    auto lin = [&] {
        std::string s = "(+ (* " + std::to_string(rng() % 5) + " " + vars[rng() % 3] + ") " + std::to_string(rng() % 7) +
                        ")";
        return s;
    };
    if (depth == 0 || rng() % 3 == 0) {
        const char* ops[] = {"<=", ">=", "="};
        return std::string("(") + ops[rng() % 3] + " " + lin() + " " + lin() + ")";
    }
    const char* ops[] = {"and", "or"};
    if (rng() % 4 == 0) return "(not " + random_term(rng, depth - 1) + ")";
    return std::string("(") + ops[rng() % 2] + " " + random_term(rng, depth - 1) + " " + random_term(rng, depth - 1) + ")";
}

}  // namespace

TEST_CASE("a session answers sat with a model") {
    SolverSession s(test::solver());
    CHECK(s.alive());
    s.declare_int("x");
    s.assert_formula("(>= x 0)");
    auto r = s.check();
    REQUIRE(r.sat());
    CHECK(r.value("x") >= 0);
}

TEST_CASE("push and pop scope assertions") {
    SolverSession s(test::solver());
    s.declare_int("x");
    s.assert_formula("(>= x 0)");
    const auto before = s.assertions();
    s.push();
    s.assert_formula("(< x 0)");
    CHECK(s.depth() == 1);
    CHECK(s.check().unsat());
    s.pop();
    CHECK(s.assertions() == before);
    CHECK(s.assertion_count() == 1);
    CHECK(s.check().sat());
    CHECK_THROWS_AS(s.pop(), UsageError);
}

TEST_CASE("declarations are scoped too") {
    SolverSession s(test::solver());
    s.push();
    s.declare_int("a@1");
    CHECK(s.is_declared("a@1"));
    CHECK_THROWS_AS(s.declare_int("a@1"), UsageError);
    s.pop();
    CHECK_FALSE(s.is_declared("a@1"));
    s.declare_int("a@1");
    s.assert_formula("(= a@1 4)");
    auto r = s.check();
    REQUIRE(r.sat());
    CHECK(r.value("a@1") == 4);
}

TEST_CASE("constant assertions") {
    SolverSession s(test::solver());
    s.assert_formula("true");
    CHECK(s.check().sat());
    s.assert_formula("false");
    CHECK(s.check().unsat());
}

TEST_CASE("Boolean symbols read back as 0/1") {
    SolverSession s(test::solver());
    s.declare_bool("b");
    s.declare_int("y");
    s.assert_formula("(and b (= y 3))");
    auto r = s.check();
    REQUIRE(r.sat());
    CHECK(r.value("b") == 1);
    CHECK(r.value("y") == 3);
}

TEST_CASE("missing binary is a spawn error") {
    SolverConfig c;
    c.executable = "/nonexistent/solver-binary";
    CHECK_THROWS_AS(SolverSession{c}, SolverError);
}

TEST_CASE("a solver rejecting the logic is a session error") {
    auto c = fake_solver("nologic",
                         "while read line; do\n"
                         "  case \"$line\" in\n"
                         "    *set-logic*) echo '(error \"unsupported logic\")' ;;\n"
                         "    *) echo success ;;\n"
                         "  esac\n"
                         "done\n");
    CHECK_THROWS_AS(SolverSession{c}, SolverError);
    CHECK(SolverSession::live_processes() == 0);
}

TEST_CASE("a crashing solver yields UNKNOWN(crash) and a dead session") {
    auto c = fake_solver("crash",
                         "while read line; do\n"
                         "  case \"$line\" in\n"
                         "    *check-sat*) exit 3 ;;\n"
                         "    *) echo success ;;\n"
                         "  esac\n"
                         "done\n");
    SolverSession s(c);
    s.assert_formula("true");
    auto r = s.check();
    CHECK(r.unknown());
    CHECK(r.reason == "crash");
    CHECK_FALSE(s.alive());
    CHECK_THROWS_AS(s.assert_formula("true"), SolverError);
}

TEST_CASE("budget exhaustion is UNKNOWN(timeout)") {
    auto c = fake_solver("slow",
                         "while read line; do\n"
                         "  case \"$line\" in\n"
                         "    *check-sat*) sleep 5 ;;\n"
                         "    *) echo success ;;\n"
                         "  esac\n"
                         "done\n");
    c.query_budget = std::chrono::milliseconds(50);
    SolverSession s(c);
    auto started = std::chrono::steady_clock::now();
    auto r = s.check();
    CHECK(r.unknown());
    CHECK(r.reason == "timeout");
    CHECK(std::chrono::steady_clock::now() - started < std::chrono::seconds(2));
    CHECK_FALSE(s.alive());
}

TEST_CASE("a stop request cancels a blocked check") {
    auto c = fake_solver("hang",
                         "while read line; do\n"
                         "  case \"$line\" in\n"
                         "    *check-sat*) sleep 30 ;;\n"
                         "    *) echo success ;;\n"
                         "  esac\n"
                         "done\n");
    std::stop_source source;
    SolverSession s(c, source.get_token());
    std::jthread killer([&] {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
        source.request_stop();
    });
    auto started = std::chrono::steady_clock::now();
    auto r = s.check();
    CHECK(r.reason == "cancelled");
    CHECK(std::chrono::steady_clock::now() - started < std::chrono::milliseconds(600));
    CHECK(SolverSession::live_processes() == 0);
}

TEST_CASE("the debug sink mirrors the exchange") {
    auto c = test::solver();
    std::vector<std::string> lines;
    c.debug_sink = [&](std::string_view l) { lines.emplace_back(l); };
    SolverSession s(c);
    s.assert_formula("true");
    s.check();
    bool sent = false, received = false;
    for (const auto& l : lines) {
        sent = sent || l.find("> (check-sat)") != std::string::npos;
        received = received || l.find("< sat") != std::string::npos;
    }
    CHECK(sent);
    CHECK(received);
}

TEST_CASE("the linter rejects non-linear terms") {
    CHECK(is_linear("(+ (* 3 x) y)"));
    CHECK(is_linear("(* 2 (+ x 1))"));
    CHECK_FALSE(is_linear("(* x y)"));
    auto c = test::solver();
    c.lint_terms = true;
    SolverSession s(c);
    s.declare_int("x");
    CHECK_THROWS_AS(s.assert_formula("(>= (* x x) 0)"), UsageError);
}

TEST_CASE("symbols are quoted when needed") {
    CHECK(symbol("p") == "p");
    CHECK(symbol("p@0") == "p@0");
    CHECK(symbol("0p") == "|0p|");
    CHECK(symbol("a b") == "|a b|");
}

TEST_CASE("s-expressions") {
    auto e = parse_sexpr("(model (define-fun |x@0| () Int (- 3)))");
    REQUIRE(e.is_list);
    CHECK(e.list[1].list[1].atom == "x@0");
    CHECK(as_integer(e.list[1].list[4]) == -3);
    CHECK(paren_balance("(a (b \")\" |)|) ; )\n") == 1);
    CHECK_THROWS(parse_sexpr("(a b"));
}

TEST_CASE("property: models satisfy every asserted term") {
    std::mt19937 rng(99);
    SolverSession s(test::solver());
    for (const char* v : {"x", "y", "z"}) {
        s.declare_int(v);
        s.assert_formula(std::string("(>= ") + v + " 0)");
    }
    int sat = 0;
    for (int round = 0; round < 40; ++round) {
        s.push();
        for (int k = 0; k < 3; ++k) s.assert_formula(random_term(rng, 3));
        auto r = s.check();
        if (r.sat()) {
            ++sat;
            std::map<std::string, long long> env(r.model.begin(), r.model.end());
            for (const auto& a : s.assertions()) CHECK(eval_smt(a, env) == 1);
        }
        s.pop();
        CHECK(s.assertion_count() == 3);
    }
    CHECK(sat > 0);
}
