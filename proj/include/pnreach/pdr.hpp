#pragma once

#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "pnreach/model.hpp"
#include "pnreach/smt.hpp"

namespace pnreach {

/// IC3/PDR for coverability goals over one net.
///
/// States are markings and bad regions are upward closed, so every proof
/// obligation is an up-set `m >= c` (a cube) and every frame clause is the
/// negation of one: `p1 <= c1 - 1 \/ ... \/ pn <= cn - 1`. Frames are stored
/// delta-encoded: a cube blocked at level i is excluded from F_1 .. F_i.
class PdrEngine {
public:
    enum class Outcome { Reachable, Unreachable, Unknown };

    using Cube = std::vector<std::pair<PlaceId, Tokens>>;  // sorted by place, bounds > 0

    PdrEngine(const PetriNet& net, BoolExpr goal, smt::SolverConfig config, std::stop_token stop = {},
              int max_frames = -1);

    /// Positive combinations of atoms `sum a_i p_i >= c` with a_i >= 0.
    static bool is_coverability_goal(const BoolExpr& goal);

    Outcome run();

    /// Firing sequence from m0 into the goal, after Reachable.
    const Trace& trace() const { return trace_; }
    /// Inductive invariant excluding the goal, after Unreachable.
    const BoolExpr& invariant() const { return invariant_; }

    /// F_1 .. F_k as formulas over place names (F_0 is the initial marking).
    std::vector<BoolExpr> frames() const;
    /// Number of SMT queries issued so far.
    int queries() const noexcept { return queries_; }

private:
    struct Obligation {
        Cube cube;
        int level;
        std::optional<std::size_t> parent;
        TransitionId via = 0;  // transition from this cube into the parent's cube
    };

    smt::SmtResult solve(const std::vector<std::string>& assertions, bool with_model);
    std::vector<std::string> frame_assertions(int level) const;  // F_level @0
    bool satisfied_initially(const Cube& c) const;
    std::string cube_term(const Cube& c, int step) const;
    std::string clause_term(const Cube& c, int step) const;
    BoolExpr clause_formula(const Cube& c) const;

    /// Smallest cube below the bad model whose up-set still lies inside the goal.
    Cube generalize_bad(const Marking& m);
    bool up_set_in_goal(const Cube& c);
    /// UNSAT(F_{level-1} /\ not c /\ T /\ c') and m0 outside c.
    bool relatively_inductive(const Cube& c, int level);
    Cube generalize(Cube c, int level);
    Cube predecessor_cube(const Cube& c, TransitionId t) const;

    bool subsumed(const Cube& c, int level) const;
    void add_blocked(Cube c, int level);
    /// False when a counterexample was found (trace_ set), throws Unknown on solver failure.
    bool block(Cube bad, int k);
    void build_trace(const std::vector<Obligation>& obligations, std::size_t start, TransitionId first);
    /// Pushes clauses forward; returns the level whose delta became empty, or 0.
    int propagate(int k);

    const PetriNet& net_;
    BoolExpr goal_;
    smt::SolverConfig config_;
    std::stop_token stop_;
    int max_frames_;

    std::optional<smt::SolverSession> session_;
    std::string step_term_;
    std::string goal_term_;
    std::string not_goal_term_;
    std::vector<std::vector<Cube>> levels_;  // levels_[i] = cubes blocked exactly up to F_i; levels_[0] unused

    Trace trace_;
    BoolExpr invariant_;
    int queries_ = 0;
};

}  // namespace pnreach
