#include "pnreach/model.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "pnreach/error.hpp"

namespace pnreach {

namespace {

Tokens checked_add(Tokens a, Tokens b) {
    Tokens r;
    if (__builtin_add_overflow(a, b, &r)) throw EvaluationError("integer overflow");
    return r;
}

Tokens checked_mul(Tokens a, Tokens b) {
    Tokens r;
    if (__builtin_mul_overflow(a, b, &r)) throw EvaluationError("integer overflow");
    return r;
}

bool compare(Tokens value, Comparison op) {
    switch (op) {
        case Comparison::Eq: return value == 0;
        case Comparison::Le: return value <= 0;
        case Comparison::Ge: return value >= 0;
    }
    return false;
}

void add_arc(std::vector<Arc>& arcs, PlaceId p, Tokens weight) {
    if (weight < 0) throw Error("negative arc weight");
    if (weight == 0) return;
    auto it = std::lower_bound(arcs.begin(), arcs.end(), p,
                               [](const Arc& a, PlaceId id) { return a.place < id; });
    if (it != arcs.end() && it->place == p)
        it->weight = checked_add(it->weight, weight);
    else
        arcs.insert(it, Arc{p, weight});
}

Tokens arc_weight(std::span<const Arc> arcs, PlaceId p) {
    auto it = std::lower_bound(arcs.begin(), arcs.end(), p,
                               [](const Arc& a, PlaceId id) { return a.place < id; });
    return (it != arcs.end() && it->place == p) ? it->weight : 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Marking

Marking::Marking(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].second < 0) throw Error("negative token count in marking");
        if (i > 0 && entries[i].first == entries[i - 1].first)
            throw Error("duplicate place in marking");
        if (entries[i].second > 0) entries_.push_back(entries[i]);
    }
}

Tokens Marking::operator[](PlaceId place) const noexcept {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), place,
                               [](const Entry& e, PlaceId p) { return e.first < p; });
    return (it != entries_.end() && it->first == place) ? it->second : 0;
}

void Marking::set(PlaceId place, Tokens value) {
    if (value < 0) throw Error("negative token count in marking");
    auto it = std::lower_bound(entries_.begin(), entries_.end(), place,
                               [](const Entry& e, PlaceId p) { return e.first < p; });
    bool present = it != entries_.end() && it->first == place;
    if (value == 0) {
        if (present) entries_.erase(it);
    } else if (present) {
        it->second = value;
    } else {
        entries_.insert(it, Entry{place, value});
    }
}

bool Marking::covers(const Marking& other) const noexcept {
    for (const auto& [p, v] : other.entries_)
        if ((*this)[p] < v) return false;
    return true;
}

std::size_t Marking::hash() const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (const auto& [p, v] : entries_) {
        h ^= static_cast<std::size_t>(p) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h ^= static_cast<std::size_t>(v) * 0x100000001b3ULL + (h << 6) + (h >> 2);
    }
    return h;
}

// ---------------------------------------------------------------------------
// PetriNet

void PetriNet::check_name_free(const std::string& name) const {
    if (name.empty()) throw Error("empty node identifier");
    if (place_index_.count(name) || transition_index_.count(name))
        throw Error("duplicate node identifier '" + name + "'");
}

PlaceId PetriNet::add_place(std::string name, Tokens initial) {
    check_name_free(name);
    auto id = static_cast<PlaceId>(places_.size());
    place_index_.emplace(name, id);
    places_.push_back(std::move(name));
    set_initial(id, initial);
    return id;
}

TransitionId PetriNet::add_transition(std::string name) {
    check_name_free(name);
    auto id = static_cast<TransitionId>(transitions_.size());
    transition_index_.emplace(name, id);
    transitions_.push_back(Transition{std::move(name), {}, {}});
    return id;
}

void PetriNet::add_pre(TransitionId t, PlaceId p, Tokens weight) {
    if (p >= places_.size()) throw Error("unknown place id");
    add_arc(transitions_.at(t).pre, p, weight);
}

void PetriNet::add_post(TransitionId t, PlaceId p, Tokens weight) {
    if (p >= places_.size()) throw Error("unknown place id");
    add_arc(transitions_.at(t).post, p, weight);
}

void PetriNet::set_initial(PlaceId p, Tokens tokens) {
    if (p >= places_.size()) throw Error("unknown place id");
    if (tokens < 0) throw Error("negative initial marking for '" + places_[p] + "'");
    initial_.set(p, tokens);
}

std::optional<PlaceId> PetriNet::find_place(std::string_view name) const {
    auto it = place_index_.find(std::string(name));
    if (it == place_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<TransitionId> PetriNet::find_transition(std::string_view name) const {
    auto it = transition_index_.find(std::string(name));
    if (it == transition_index_.end()) return std::nullopt;
    return it->second;
}

Tokens PetriNet::pre_weight(TransitionId t, PlaceId p) const { return arc_weight(pre(t), p); }
Tokens PetriNet::post_weight(TransitionId t, PlaceId p) const { return arc_weight(post(t), p); }

bool same_structure(const PetriNet& a, const PetriNet& b) {
    if (a.place_names() != b.place_names()) return false;
    if (a.transition_count() != b.transition_count()) return false;
    for (TransitionId t = 0; t < a.transition_count(); ++t) {
        if (a.transition_name(t) != b.transition_name(t)) return false;
        if (!std::ranges::equal(a.pre(t), b.pre(t))) return false;
        if (!std::ranges::equal(a.post(t), b.post(t))) return false;
    }
    return a.initial_marking() == b.initial_marking();
}

// ---------------------------------------------------------------------------
// LinearExpr

LinearExpr::LinearExpr(Tokens constant, std::vector<LinearTerm> terms)
    : constant_(constant), terms_(std::move(terms)) {
    normalize();
}

LinearExpr LinearExpr::place(std::string name, Tokens coefficient) {
    return LinearExpr(0, {LinearTerm{coefficient, std::move(name)}});
}

void LinearExpr::normalize() {
    std::stable_sort(terms_.begin(), terms_.end(),
                     [](const LinearTerm& a, const LinearTerm& b) { return a.place < b.place; });
    std::vector<LinearTerm> merged;
    for (auto& t : terms_) {
        if (!merged.empty() && merged.back().place == t.place)
            merged.back().coefficient = checked_add(merged.back().coefficient, t.coefficient);
        else
            merged.push_back(std::move(t));
    }
    std::erase_if(merged, [](const LinearTerm& t) { return t.coefficient == 0; });
    terms_ = std::move(merged);
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& other) {
    constant_ = checked_add(constant_, other.constant_);
    terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
    normalize();
    return *this;
}

LinearExpr& LinearExpr::operator-=(const LinearExpr& other) { return *this += other * -1; }

LinearExpr& LinearExpr::operator*=(Tokens factor) {
    constant_ = checked_mul(constant_, factor);
    for (auto& t : terms_) t.coefficient = checked_mul(t.coefficient, factor);
    normalize();
    return *this;
}

Tokens LinearExpr::coefficient_of(const std::string& place) const noexcept {
    for (const auto& t : terms_)
        if (t.place == place) return t.coefficient;
    return 0;
}

LinearExpr LinearExpr::substitute(const std::string& place, const LinearExpr& replacement) const {
    Tokens k = coefficient_of(place);
    if (k == 0) return *this;
    LinearExpr rest = *this;
    std::erase_if(rest.terms_, [&](const LinearTerm& t) { return t.place == place; });
    return rest + replacement * k;
}

// ---------------------------------------------------------------------------
// BoolExpr

struct BoolExpr::Node {
    Kind kind;
    bool value = true;
    std::optional<Atom> atom;
    std::vector<BoolExpr> children;
};

BoolExpr::BoolExpr() : node_(std::make_shared<const Node>(Node{Kind::Constant, true, {}, {}})) {}

BoolExpr BoolExpr::constant(bool value) {
    return BoolExpr(std::make_shared<const Node>(Node{Kind::Constant, value, {}, {}}));
}

BoolExpr BoolExpr::atom(Atom a) {
    return BoolExpr(std::make_shared<const Node>(Node{Kind::Atom, true, std::move(a), {}}));
}

BoolExpr BoolExpr::atom(LinearExpr lhs, Comparison op, LinearExpr rhs) {
    return atom(Atom{std::move(lhs), op, std::move(rhs)});
}

BoolExpr BoolExpr::negation(BoolExpr e) {
    return BoolExpr(std::make_shared<const Node>(Node{Kind::Not, true, {}, {std::move(e)}}));
}

BoolExpr BoolExpr::conjunction(std::vector<BoolExpr> children) {
    if (children.empty()) return constant(true);
    if (children.size() == 1) return std::move(children.front());
    return BoolExpr(std::make_shared<const Node>(Node{Kind::And, true, {}, std::move(children)}));
}

BoolExpr BoolExpr::disjunction(std::vector<BoolExpr> children) {
    if (children.empty()) return constant(false);
    if (children.size() == 1) return std::move(children.front());
    return BoolExpr(std::make_shared<const Node>(Node{Kind::Or, true, {}, std::move(children)}));
}

BoolExpr::Kind BoolExpr::kind() const noexcept { return node_->kind; }

bool BoolExpr::constant_value() const {
    if (node_->kind != Kind::Constant) throw Error("not a constant");
    return node_->value;
}

const Atom& BoolExpr::as_atom() const {
    if (node_->kind != Kind::Atom) throw Error("not an atom");
    return *node_->atom;
}

const std::vector<BoolExpr>& BoolExpr::children() const { return node_->children; }

bool operator==(const BoolExpr& a, const BoolExpr& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case BoolExpr::Kind::Constant: return a.node_->value == b.node_->value;
        case BoolExpr::Kind::Atom: return *a.node_->atom == *b.node_->atom;
        default: return a.children() == b.children();
    }
}

BoolExpr operator&&(BoolExpr a, BoolExpr b) { return BoolExpr::conjunction({std::move(a), std::move(b)}); }
BoolExpr operator||(BoolExpr a, BoolExpr b) { return BoolExpr::disjunction({std::move(a), std::move(b)}); }
BoolExpr operator!(BoolExpr a) { return BoolExpr::negation(std::move(a)); }

namespace {

BoolExpr push(const BoolExpr& e, bool negate) {
    using K = BoolExpr::Kind;
    switch (e.kind()) {
        case K::Constant: return BoolExpr::constant(e.constant_value() != negate);
        case K::Atom: {
            if (!negate) return e;
            const Atom& a = e.as_atom();
            LinearExpr one(1);
            switch (a.op) {
                case Comparison::Le: return BoolExpr::atom(a.lhs, Comparison::Ge, a.rhs + one);
                case Comparison::Ge: return BoolExpr::atom(a.lhs, Comparison::Le, a.rhs - one);
                case Comparison::Eq:
                    return BoolExpr::disjunction({BoolExpr::atom(a.lhs, Comparison::Le, a.rhs - one),
                                                  BoolExpr::atom(a.lhs, Comparison::Ge, a.rhs + one)});
            }
            return e;
        }
        case K::Not: return push(e.children().front(), !negate);
        case K::And:
        case K::Or: {
            std::vector<BoolExpr> kids;
            kids.reserve(e.children().size());
            for (const auto& c : e.children()) kids.push_back(push(c, negate));
            bool conj = (e.kind() == K::And) != negate;
            return conj ? BoolExpr::conjunction(std::move(kids)) : BoolExpr::disjunction(std::move(kids));
        }
    }
    return e;
}

void collect_places(const BoolExpr& e, std::set<std::string>& out) {
    if (e.kind() == BoolExpr::Kind::Atom) {
        for (const auto& t : e.as_atom().lhs.terms()) out.insert(t.place);
        for (const auto& t : e.as_atom().rhs.terms()) out.insert(t.place);
        return;
    }
    if (e.kind() == BoolExpr::Kind::Constant) return;
    for (const auto& c : e.children()) collect_places(c, out);
}

const char* op_symbol(Comparison op) {
    switch (op) {
        case Comparison::Eq: return "=";
        case Comparison::Le: return "<=";
        case Comparison::Ge: return ">=";
    }
    return "?";
}

}  // namespace

BoolExpr push_negations(const BoolExpr& e) { return push(e, false); }

std::vector<std::string> referenced_places(const BoolExpr& e) {
    std::set<std::string> names;
    collect_places(e, names);
    return {names.begin(), names.end()};
}

std::string to_string(const LinearExpr& e) {
    std::ostringstream out;
    bool first = true;
    for (const auto& t : e.terms()) {
        Tokens c = t.coefficient;
        if (!first) out << (c < 0 ? " - " : " + ");
        else if (c < 0) out << "-";
        Tokens magnitude = c < 0 ? -c : c;
        if (magnitude != 1) out << magnitude << "*";
        out << t.place;
        first = false;
    }
    if (first) {
        out << e.constant();
    } else if (e.constant() != 0) {
        out << (e.constant() < 0 ? " - " : " + ") << (e.constant() < 0 ? -e.constant() : e.constant());
    }
    return out.str();
}

std::string to_string(const BoolExpr& e) {
    using K = BoolExpr::Kind;
    switch (e.kind()) {
        case K::Constant: return e.constant_value() ? "true" : "false";
        case K::Atom: {
            const Atom& a = e.as_atom();
            return to_string(a.lhs) + " " + op_symbol(a.op) + " " + to_string(a.rhs);
        }
        case K::Not: return "not (" + to_string(e.children().front()) + ")";
        case K::And:
        case K::Or: {
            std::string sep = e.kind() == K::And ? " and " : " or ";
            std::string out = "(";
            for (std::size_t i = 0; i < e.children().size(); ++i) {
                if (i) out += sep;
                out += to_string(e.children()[i]);
            }
            return out + ")";
        }
    }
    return "?";
}

Goal normalize(const Query& q) {
    if (q.quantifier == Quantifier::EF) return Goal{push_negations(q.body), Quantifier::EF};
    return Goal{push_negations(BoolExpr::negation(q.body)), Quantifier::AG};
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

template <class Lookup>
bool evaluate_with(const BoolExpr& f, const Lookup& lookup) {
    using K = BoolExpr::Kind;
    switch (f.kind()) {
        case K::Constant: return f.constant_value();
        case K::Atom: {
            const Atom& a = f.as_atom();
            LinearExpr diff = a.lhs - a.rhs;
            Tokens sum = diff.constant();
            for (const auto& t : diff.terms()) sum = checked_add(sum, checked_mul(t.coefficient, lookup(t.place)));
            return compare(sum, a.op);
        }
        case K::Not: return !evaluate_with(f.children().front(), lookup);
        case K::And:
            for (const auto& c : f.children())
                if (!evaluate_with(c, lookup)) return false;
            return true;
        case K::Or:
            for (const auto& c : f.children())
                if (evaluate_with(c, lookup)) return true;
            return false;
    }
    return false;
}

}  // namespace

bool evaluate(const std::map<std::string, Tokens, std::less<>>& m, const BoolExpr& f) {
    return evaluate_with(f, [&](const std::string& place) {
        auto it = m.find(place);
        if (it == m.end()) throw EvaluationError("unbound place '" + place + "'");
        return it->second;
    });
}

bool evaluate(const PetriNet& net, const Marking& m, const BoolExpr& f) {
    return BoundFormula(net, f).holds(m);
}

BoundFormula::BoundFormula(const PetriNet& net, const BoolExpr& f) { root_ = compile(net, f); }

std::size_t BoundFormula::compile(const PetriNet& net, const BoolExpr& f) {
    Node node;
    node.kind = f.kind();
    switch (f.kind()) {
        case BoolExpr::Kind::Constant: node.value = f.constant_value(); break;
        case BoolExpr::Kind::Atom: {
            const Atom& a = f.as_atom();
            LinearExpr diff = a.lhs - a.rhs;
            node.op = a.op;
            node.constant = diff.constant();
            for (const auto& t : diff.terms()) {
                auto p = net.find_place(t.place);
                if (!p) throw EvaluationError("unbound place '" + t.place + "'");
                node.terms.emplace_back(*p, t.coefficient);
            }
            break;
        }
        default:
            for (const auto& c : f.children()) node.children.push_back(compile(net, c));
    }
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
}

bool BoundFormula::holds(const Marking& m) const { return holds(root_, m); }

bool BoundFormula::holds(std::size_t index, const Marking& m) const {
    const Node& n = nodes_[index];
    switch (n.kind) {
        case BoolExpr::Kind::Constant: return n.value;
        case BoolExpr::Kind::Atom: {
            Tokens sum = n.constant;
            for (const auto& [p, c] : n.terms) sum = checked_add(sum, checked_mul(c, m[p]));
            return compare(sum, n.op);
        }
        case BoolExpr::Kind::Not: return !holds(n.children.front(), m);
        case BoolExpr::Kind::And:
            for (auto c : n.children)
                if (!holds(c, m)) return false;
            return true;
        case BoolExpr::Kind::Or:
            for (auto c : n.children)
                if (holds(c, m)) return true;
            return false;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Firing

bool is_enabled(const PetriNet& net, const Marking& m, TransitionId t) {
    for (const auto& arc : net.pre(t))
        if (m[arc.place] < arc.weight) return false;
    return true;
}

Marking fire(const PetriNet& net, const Marking& m, TransitionId t) {
    if (t >= net.transition_count()) throw Error("unknown transition id");
    if (!is_enabled(net, m, t))
        throw NotEnabledError("transition '" + net.transition_name(t) + "' not enabled");
    Marking next = m;
    for (const auto& arc : net.pre(t)) next.set(arc.place, next[arc.place] - arc.weight);
    for (const auto& arc : net.post(t)) next.set(arc.place, checked_add(next[arc.place], arc.weight));
    return next;
}

Marking fire(const PetriNet& net, const Marking& m, std::string_view transition) {
    auto t = net.find_transition(transition);
    if (!t) throw Error("unknown transition '" + std::string(transition) + "'");
    return fire(net, m, *t);
}

std::vector<TransitionId> enabled_transitions(const PetriNet& net, const Marking& m) {
    std::vector<TransitionId> out;
    for (TransitionId t = 0; t < net.transition_count(); ++t)
        if (is_enabled(net, m, t)) out.push_back(t);
    return out;
}

BoolExpr enabled_formula(const PetriNet& net, TransitionId t) {
    std::vector<BoolExpr> conj;
    for (const auto& arc : net.pre(t))
        conj.push_back(BoolExpr::atom(LinearExpr::place(net.place_name(arc.place)), Comparison::Ge,
                                      LinearExpr(arc.weight)));
    return BoolExpr::conjunction(std::move(conj));
}

BoolExpr deadlock_formula(const PetriNet& net) {
    std::vector<BoolExpr> conj;
    for (TransitionId t = 0; t < net.transition_count(); ++t)
        conj.push_back(BoolExpr::negation(enabled_formula(net, t)));
    return BoolExpr::conjunction(std::move(conj));
}

Trace replay(const PetriNet& net, std::vector<TransitionId> transitions) {
    Trace trace;
    trace.markings.push_back(net.initial_marking());
    for (std::size_t i = 0; i < transitions.size(); ++i) {
        TransitionId t = transitions[i];
        if (t >= net.transition_count() || !is_enabled(net, trace.markings.back(), t))
            throw NotEnabledError("step " + std::to_string(i) + ": transition not enabled");
        trace.markings.push_back(fire(net, trace.markings.back(), t));
    }
    trace.transitions = std::move(transitions);
    return trace;
}

std::string format_marking(const PetriNet& net, const Marking& m) {
    std::string out;
    for (const auto& [p, v] : m.entries()) {
        if (!out.empty()) out += ' ';
        out += net.place_name(p) + ":" + std::to_string(v);
    }
    return out;
}

}  // namespace pnreach
