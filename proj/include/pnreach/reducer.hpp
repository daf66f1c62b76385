#pragma once

#include "pnreach/model.hpp"
#include "pnreach/parsers.hpp"

namespace pnreach {

struct Reduction {
    PetriNet net;
    ReductionSystem system;
};

/// Structural polyhedral reduction: constant places, duplicate places and
/// chain agglomeration, applied round-robin in that order until nothing
/// changes. Surviving places keep their names; places created by
/// agglomeration are eliminated from the equations again when they are
/// themselves removed, so every equation mentions only original places and
/// places of the reduced net.
Reduction reduce(const PetriNet& net);

/// (|P1| - |P2|) / |P1|, and 0 when the original net has no places.
double reduction_ratio(const PetriNet& original, const PetriNet& reduced);

/// goal /\ E /\ (removed original places >= 0): the goal over original places
/// joined with the equations, for checkers that solve over the reduced net.
BoolExpr transform_query(const BoolExpr& goal, const ReductionSystem& system);

}  // namespace pnreach
