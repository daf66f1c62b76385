#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pnreach/model.hpp"
#include "pnreach/parsers.hpp"
#include "pnreach/smt.hpp"

// QF_LIA encodings of nets and formulas, as SMT-LIB2 term text.
//
// Variable naming is fixed: the marking of place p at unrolling step k is
// `p@k`, the firing count of transition t in the state equation is
// `t@sigma`, trap selectors are `p@trap`. Names are quoted with bars when
// they are not simple SMT-LIB symbols. Since the step tag follows the last
// '@' and never contains one, names are injective over (place, tag).
namespace pnreach::enc {

class StepVars {
public:
    explicit StepVars(int step) : tag_(std::to_string(step)) {}
    explicit StepVars(std::string tag) : tag_(std::move(tag)) {}

    const std::string& tag() const noexcept { return tag_; }
    /// Unquoted variable name, e.g. "p@3".
    std::string name(std::string_view place) const { return std::string(place) + "@" + tag_; }
    /// SMT-LIB symbol for the variable.
    std::string var(std::string_view place) const { return smt::symbol(name(place)); }

private:
    std::string tag_;
};

std::string firing_count_name(std::string_view transition);

std::string conjunction(const std::vector<std::string>& terms);
std::string disjunction(const std::vector<std::string>& terms);
std::string negation(const std::string& term);
std::string integer(Tokens value);

std::string encode_linear(const LinearExpr& e, const StepVars& vars);

/// Declares one Int per place at `vars`.
void declare_places(smt::SolverSession& s, const PetriNet& net, const StepVars& vars);
void declare_places(smt::SolverSession& s, const std::vector<std::string>& places, const StepVars& vars);

std::string encode_nonneg(const PetriNet& net, const StepVars& vars);
std::string encode_nonneg(const std::vector<std::string>& places, const StepVars& vars);
std::string encode_initial(const PetriNet& net, const StepVars& vars);
/// Fixes the variables to a given marking.
std::string encode_marking(const PetriNet& net, const Marking& m, const StepVars& vars);
/// One firing of some transition between the two steps; false without transitions.
std::string encode_step(const PetriNet& net, const StepVars& from, const StepVars& to);
std::string encode_bool(const BoolExpr& f, const StepVars& vars);

/// Incidence matrix C(p,t) = post(t,p) - pre(t,p), stored by place.
class StateEquationSystem {
public:
    explicit StateEquationSystem(const PetriNet& net);

    Tokens incidence(PlaceId p, TransitionId t) const;
    /// Non-zero entries of row p.
    const std::vector<std::pair<TransitionId, Tokens>>& row(PlaceId p) const { return rows_.at(p); }

private:
    std::vector<std::vector<std::pair<TransitionId, Tokens>>> rows_;
};

/// Declares the firing-count variables.
void declare_firing_counts(smt::SolverSession& s, const PetriNet& net);
/// p = m0(p) + sum_t C(p,t) * t@sigma for all p, with counts and markings non-negative.
std::string encode_state_equation(const PetriNet& net, const StepVars& marking);

/// Searches for a trap that is marked in m0 and empty in `candidate`, using
/// one Boolean selector per place inside a push/pop scope of `s`. Returns the
/// trap's places in increasing order, or nullopt when none exists (or the
/// solver cannot decide).
std::optional<std::vector<PlaceId>> find_trap(smt::SolverSession& s, const PetriNet& net,
                                              const Marking& candidate);
/// Syntactic trap condition plus the two marking conditions.
bool is_trap(const PetriNet& net, std::span<const PlaceId> places);

/// sum_{p in S} p >= 1. Throws UsageError on an empty set.
std::string trap_constraint(const PetriNet& net, std::span<const PlaceId> places, const StepVars& vars);

/// E's equations with original names at `original` and reduced names at
/// `reduced`, non-negativity of every original variable, and p_orig = p_red
/// for surviving places when the two tags differ.
std::string encode_reduction(const ReductionSystem& e, const StepVars& original, const StepVars& reduced);

/// Marking read back from a model at the given step.
Marking marking_from_model(const PetriNet& net, const smt::SmtResult& model, const StepVars& vars);
/// Some transition leading from `from` to `to`, if any.
std::optional<TransitionId> transition_between(const PetriNet& net, const Marking& from, const Marking& to);
/// Rebuilds the firing sequence from the markings of steps 0..depth in a model.
Trace trace_from_model(const PetriNet& net, const smt::SmtResult& model, int depth);

}  // namespace pnreach::enc
