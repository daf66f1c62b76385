#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pnreach {

using Tokens = std::int64_t;
using PlaceId = std::uint32_t;
using TransitionId = std::uint32_t;

/// Sparse token assignment over the places of one net. Absent places hold 0 tokens.
class Marking {
public:
    using Entry = std::pair<PlaceId, Tokens>;

    Marking() = default;
    /// Entries may be unsorted; duplicates are rejected, zeros dropped, negatives rejected.
    explicit Marking(std::vector<Entry> entries);

    Tokens operator[](PlaceId place) const noexcept;
    void set(PlaceId place, Tokens value);

    std::span<const Entry> entries() const noexcept { return entries_; }
    std::size_t support_size() const noexcept { return entries_.size(); }

    /// Componentwise m >= other.
    bool covers(const Marking& other) const noexcept;

    std::size_t hash() const noexcept;
    friend bool operator==(const Marking&, const Marking&) = default;

private:
    std::vector<Entry> entries_;  // sorted by place, values > 0
};

struct MarkingHash {
    std::size_t operator()(const Marking& m) const noexcept { return m.hash(); }
};

struct Arc {
    PlaceId place;
    Tokens weight;
    friend bool operator==(const Arc&, const Arc&) = default;
};

/// Place/transition net with weighted arcs. Built once, then shared read-only.
class PetriNet {
public:
    PetriNet() = default;
    explicit PetriNet(std::string name) : name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }
    void set_name(std::string name) { name_ = std::move(name); }

    PlaceId add_place(std::string name, Tokens initial = 0);
    TransitionId add_transition(std::string name);
    /// Arc weights accumulate when the same pair is added twice.
    void add_pre(TransitionId t, PlaceId p, Tokens weight);
    void add_post(TransitionId t, PlaceId p, Tokens weight);
    void set_initial(PlaceId p, Tokens tokens);

    std::size_t place_count() const noexcept { return places_.size(); }
    std::size_t transition_count() const noexcept { return transitions_.size(); }

    const std::string& place_name(PlaceId p) const { return places_.at(p); }
    const std::string& transition_name(TransitionId t) const { return transitions_.at(t).name; }
    const std::vector<std::string>& place_names() const noexcept { return places_; }

    std::optional<PlaceId> find_place(std::string_view name) const;
    std::optional<TransitionId> find_transition(std::string_view name) const;

    /// Arcs sorted by place; weights are strictly positive.
    std::span<const Arc> pre(TransitionId t) const { return transitions_.at(t).pre; }
    std::span<const Arc> post(TransitionId t) const { return transitions_.at(t).post; }
    Tokens pre_weight(TransitionId t, PlaceId p) const;
    Tokens post_weight(TransitionId t, PlaceId p) const;

    const Marking& initial_marking() const noexcept { return initial_; }

private:
    struct Transition {
        std::string name;
        std::vector<Arc> pre;
        std::vector<Arc> post;
    };

    void check_name_free(const std::string& name) const;

    std::string name_;
    std::vector<std::string> places_;
    std::vector<Transition> transitions_;
    std::unordered_map<std::string, PlaceId> place_index_;
    std::unordered_map<std::string, TransitionId> transition_index_;
    Marking initial_;
};

/// Structural equality: same place and transition names in the same order,
/// same weights, same initial marking.
bool same_structure(const PetriNet& a, const PetriNet& b);

// ---------------------------------------------------------------------------
// Linear formulas

struct LinearTerm {
    Tokens coefficient;
    std::string place;
    friend bool operator==(const LinearTerm&, const LinearTerm&) = default;
};

/// constant + sum of coefficient * place. Each place appears at most once and
/// no coefficient is zero.
class LinearExpr {
public:
    LinearExpr() = default;
    explicit LinearExpr(Tokens constant) : constant_(constant) {}
    LinearExpr(Tokens constant, std::vector<LinearTerm> terms);

    static LinearExpr place(std::string name, Tokens coefficient = 1);

    Tokens constant() const noexcept { return constant_; }
    const std::vector<LinearTerm>& terms() const noexcept { return terms_; }
    bool is_constant() const noexcept { return terms_.empty(); }

    LinearExpr& operator+=(const LinearExpr& other);
    LinearExpr& operator-=(const LinearExpr& other);
    LinearExpr& operator*=(Tokens factor);
    friend LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
    friend LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }
    friend LinearExpr operator*(LinearExpr a, Tokens k) { return a *= k; }

    /// Replaces `place` by `replacement` (used to eliminate variables).
    LinearExpr substitute(const std::string& place, const LinearExpr& replacement) const;
    Tokens coefficient_of(const std::string& place) const noexcept;

    friend bool operator==(const LinearExpr&, const LinearExpr&) = default;

private:
    void normalize();

    Tokens constant_ = 0;
    std::vector<LinearTerm> terms_;  // sorted by place name
};

enum class Comparison { Eq, Le, Ge };

struct Atom {
    LinearExpr lhs;
    Comparison op;
    LinearExpr rhs;
    friend bool operator==(const Atom&, const Atom&) = default;
};

/// Immutable Boolean tree over linear atoms. Copies share structure.
class BoolExpr {
public:
    enum class Kind { Constant, Atom, Not, And, Or };

    BoolExpr();  // true

    static BoolExpr constant(bool value);
    static BoolExpr atom(Atom a);
    static BoolExpr atom(LinearExpr lhs, Comparison op, LinearExpr rhs);
    static BoolExpr negation(BoolExpr e);
    /// Empty conjunction is true, singleton collapses to its child.
    static BoolExpr conjunction(std::vector<BoolExpr> children);
    static BoolExpr disjunction(std::vector<BoolExpr> children);

    Kind kind() const noexcept;
    bool constant_value() const;
    const Atom& as_atom() const;
    /// Children of Not (exactly one), And, Or.
    const std::vector<BoolExpr>& children() const;

    friend bool operator==(const BoolExpr& a, const BoolExpr& b);

private:
    struct Node;
    explicit BoolExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

BoolExpr operator&&(BoolExpr a, BoolExpr b);
BoolExpr operator||(BoolExpr a, BoolExpr b);
BoolExpr operator!(BoolExpr a);

/// Pushes negations down to atoms using integer shifts. The result contains
/// no Not nodes: not(a <= b) is a >= b+1, not(a = b) is a <= b-1 or a >= b+1.
BoolExpr push_negations(const BoolExpr& e);

/// Distinct place names occurring in the formula, sorted.
std::vector<std::string> referenced_places(const BoolExpr& e);

std::string to_string(const LinearExpr& e);
std::string to_string(const BoolExpr& e);

// ---------------------------------------------------------------------------
// Queries

enum class Quantifier { EF, AG };

struct Query {
    std::string id;
    Quantifier quantifier;
    BoolExpr body;
};

/// Every query is decided as "is `formula` reachable?".
struct Goal {
    BoolExpr formula;  // negation-free
    Quantifier quantifier;

    /// Query answer given whether the goal is reachable.
    bool answer(bool goal_reachable) const noexcept {
        return quantifier == Quantifier::EF ? goal_reachable : !goal_reachable;
    }
};

/// EF F -> goal F; AG F -> goal not F.
Goal normalize(const Query& q);

// ---------------------------------------------------------------------------
// Semantics

/// Name-keyed full assignment; every place occurring in f must be bound.
bool evaluate(const std::map<std::string, Tokens, std::less<>>& m, const BoolExpr& f);
bool evaluate(const PetriNet& net, const Marking& m, const BoolExpr& f);

/// Formula with place names resolved against a net, for fast repeated evaluation.
class BoundFormula {
public:
    BoundFormula(const PetriNet& net, const BoolExpr& f);
    bool holds(const Marking& m) const;

private:
    struct Node {
        BoolExpr::Kind kind;
        bool value = false;
        Comparison op = Comparison::Eq;
        Tokens constant = 0;  // lhs - rhs, normalized to sum + constant (op) 0
        std::vector<std::pair<PlaceId, Tokens>> terms;
        std::vector<std::size_t> children;
    };
    std::size_t compile(const PetriNet& net, const BoolExpr& f);
    bool holds(std::size_t node, const Marking& m) const;

    std::vector<Node> nodes_;
    std::size_t root_ = 0;
};

bool is_enabled(const PetriNet& net, const Marking& m, TransitionId t);
/// Throws NotEnabledError when t is not enabled at m.
Marking fire(const PetriNet& net, const Marking& m, TransitionId t);
Marking fire(const PetriNet& net, const Marking& m, std::string_view transition);
std::vector<TransitionId> enabled_transitions(const PetriNet& net, const Marking& m);

/// enabled(t) as a conjunction of p >= pre(t,p).
BoolExpr enabled_formula(const PetriNet& net, TransitionId t);
/// Conjunction over all transitions of not enabled(t).
BoolExpr deadlock_formula(const PetriNet& net);

/// Firing sequence together with the markings it traverses (markings[0] = m0).
struct Trace {
    std::vector<TransitionId> transitions;
    std::vector<Marking> markings;

    std::size_t length() const noexcept { return transitions.size(); }
    const Marking& final_marking() const { return markings.back(); }
};

/// Replays a firing sequence from m0. Throws NotEnabledError naming the step index.
Trace replay(const PetriNet& net, std::vector<TransitionId> transitions);

/// "p:1 q:3" listing places with non-zero tokens, in place order.
std::string format_marking(const PetriNet& net, const Marking& m);

}  // namespace pnreach
