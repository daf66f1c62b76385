#pragma once

// Shared test fixtures and oracles. The oracles re-implement firing,
// formula evaluation and SMT-LIB term evaluation from scratch so that they
// do not share code with the module under test.

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pnreach/checkers.hpp"
#include "pnreach/model.hpp"
#include "pnreach/smt.hpp"

namespace pnreach::test {

using Vec = std::vector<Tokens>;

// --- fixtures ---------------------------------------------------------------

PetriNet net_a();  // p(1) -t-> q
PetriNet net_b();  // p(1), t: p -> 2p
PetriNet net_c();  // a(1) <-> b
PetriNet net_d();  // a(1), b; t1: a + b -> b
PetriNet make_net(const std::string& text);

BoolExpr ge(const std::string& p, Tokens c);
BoolExpr le(const std::string& p, Tokens c);
BoolExpr eq(const std::string& p, Tokens c);
BoolExpr atom(const LinearExpr& lhs, Comparison op, Tokens c);
LinearExpr sum(std::initializer_list<std::string> places);

Query ef(BoolExpr body, std::string id = "q");
Query ag(BoolExpr body, std::string id = "q");

struct CorpusEntry {
    std::string name;
    std::filesystem::path path;
    PetriNet net;
    std::vector<Query> queries;
};

std::filesystem::path corpus_dir();
std::vector<CorpusEntry> load_corpus();

smt::SolverConfig solver();

// --- oracles ----------------------------------------------------------------

/// Formula value at a dense marking.
bool holds(const PetriNet& net, const Vec& m, const BoolExpr& f);
Vec dense(const PetriNet& net, const Marking& m);

/// Breadth-first reachable set, or nullopt past `cap` markings.
std::optional<std::set<Vec>> reachable_set(const PetriNet& net, std::size_t cap = 200'000);

/// Karp-Miller coverability: is some marking covering an upward-closed goal reachable?
bool coverable(const PetriNet& net, const BoolExpr& monotone_goal);

/// Whether the normalized goal of the query is reachable, when an oracle can tell.
std::optional<bool> goal_reachable(const PetriNet& net, const BoolExpr& goal, std::size_t cap = 200'000);
std::optional<bool> answer(const PetriNet& net, const Query& query, std::size_t cap = 200'000);

/// Integer value of an SMT-LIB QF_LIA term (Booleans as 0/1) under an assignment.
long long eval_smt(const std::string& term, const std::map<std::string, long long>& env);

/// Original markings obtained from E with the reduced places fixed to each
/// marking of `reduced_space`; nullopt past `cap` solutions.
std::optional<std::set<Vec>> reconstruct(const PetriNet& original, const ReductionSystem& system,
                                         const PetriNet& reduced, const std::set<Vec>& reduced_space,
                                         std::size_t cap = 20'000);

/// Runs one method, requesting a stop once `budget` has elapsed.
std::optional<Verdict> run_method(Technique technique, const PetriNet& net, const Query& query,
                                  std::chrono::milliseconds budget, MethodOptions options = {},
                                  const ReducedInput* reduction = nullptr);

/// Child processes of this process, zombies included.
int child_solver_processes();

}  // namespace pnreach::test
