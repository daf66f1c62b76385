#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pnreach/model.hpp"

namespace pnreach {

enum class Technique { Induction, Bmc, KInduction, Pdr, StateEquation, RandomWalk, Cp, Enumeration };

inline constexpr Technique all_techniques[] = {Technique::Induction,     Technique::Bmc,        Technique::KInduction,
                                               Technique::Pdr,           Technique::StateEquation,
                                               Technique::RandomWalk,    Technique::Cp,         Technique::Enumeration};

/// Upper-case label, e.g. "K_INDUCTION".
std::string_view label(Technique t);
/// Accepts labels case-insensitively, with '-' for '_' ("k-induction", "state-equation").
std::optional<Technique> parse_technique(std::string_view text);

struct Certificate {
    enum class Kind { InductiveInvariant, KInductionObligation };

    Kind kind = Kind::InductiveInvariant;
    /// Inductive invariant R over the places of the certified net.
    BoolExpr invariant;
    /// Closed SMT-LIB2 script whose every check-sat must answer unsat.
    std::string obligation;
    int depth = 0;
};

struct Verdict {
    std::string query_id;
    bool answer = false;
    Technique technique = Technique::Enumeration;
    /// Whether the normalized goal was found reachable.
    bool goal_reachable = false;
    /// Witness or counterexample firing sequence.
    std::optional<Trace> trace;
    /// Set when `trace` fires transitions of the reduced net rather than the original one.
    bool trace_on_reduced_net = false;
    /// Marking of the original net satisfying the goal, when known.
    std::optional<Marking> witness;
    std::optional<Certificate> certificate;
};

}  // namespace pnreach
