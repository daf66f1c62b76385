#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stop_token>
#include <vector>

#include "pnreach/model.hpp"
#include "pnreach/parsers.hpp"
#include "pnreach/smt.hpp"
#include "pnreach/verdict.hpp"

namespace pnreach {

struct MethodOptions {
    /// Negative means unbounded (run until cancelled).
    int bmc_max_depth = -1;
    int k_induction_max_depth = -1;
    int pdr_max_frames = -1;

    std::uint64_t walk_seed = 0;
    std::size_t walk_max_length = 10'000;
    /// Zero means no limit; the walk then runs until cancelled.
    std::uint64_t walk_max_steps = 0;
    std::chrono::milliseconds walk_time_budget{0};

    std::size_t enumeration_state_cap = 1'000'000;
    int trap_cap = 100;
};

/// A reduced net together with the equations relating it to the original.
struct ReducedInput {
    PetriNet net;
    ReductionSystem system;
};

struct CheckContext {
    const PetriNet& net;
    const Query& query;
    smt::SolverConfig solver;
    std::stop_token stop;
    MethodOptions options;
    /// When set, BMC, STATE_EQUATION and CP work on the reduced net.
    const ReducedInput* reduction = nullptr;
};

/// Every method returns a Verdict, or nullopt when it is inconclusive,
/// inapplicable, out of budget or cancelled.
namespace checkers {

std::optional<Verdict> induction(const CheckContext& ctx);
std::optional<Verdict> bmc(const CheckContext& ctx);
std::optional<Verdict> k_induction(const CheckContext& ctx);
std::optional<Verdict> pdr_coverability(const CheckContext& ctx);
std::optional<Verdict> state_equation(const CheckContext& ctx);
std::optional<Verdict> random_walk(const CheckContext& ctx);
std::optional<Verdict> cp_fully_reduced(const CheckContext& ctx);
std::optional<Verdict> enumeration(const CheckContext& ctx);

std::optional<Verdict> run(Technique technique, const CheckContext& ctx);

struct StateEquationReport {
    enum class Status { Unreachable, Inconclusive };
    Status status = Status::Inconclusive;
    /// Result of the first query, before any trap constraint.
    bool plain_sat = false;
    /// Number of state-equation queries issued.
    int iterations = 0;
    /// Traps whose constraints were added, in order, as places of the net solved.
    std::vector<std::vector<PlaceId>> traps;
};

/// Trap-refined state equation for `goal`, on the reduced net when one is given.
StateEquationReport refine_state_equation(const CheckContext& ctx, const BoolExpr& goal);

struct Exploration {
    std::vector<Marking> states;  // breadth-first order, states[0] = m0
    bool complete = false;        // false when the cap was hit or the search was stopped
};

/// Breadth-first reachability set, stopping after `cap` markings.
Exploration explore(const PetriNet& net, std::size_t cap, std::stop_token stop = {});

}  // namespace checkers

}  // namespace pnreach
