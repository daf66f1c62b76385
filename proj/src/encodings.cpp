#include "pnreach/encodings.hpp"

#include <algorithm>
#include <map>

#include "pnreach/error.hpp"

namespace pnreach::enc {

namespace {

std::string nary(std::string_view op, const std::vector<std::string>& terms, std::string_view neutral) {
    if (terms.empty()) return std::string(neutral);
    if (terms.size() == 1) return terms.front();
    std::string out = "(" + std::string(op);
    for (const auto& t : terms) out += " " + t;
    return out + ")";
}

std::string scaled(Tokens coefficient, const std::string& var) {
    if (coefficient == 1) return var;
    if (coefficient == -1) return "(- " + var + ")";
    return "(* " + integer(coefficient) + " " + var + ")";
}

const char* comparison(Comparison op) {
    switch (op) {
        case Comparison::Eq: return "=";
        case Comparison::Le: return "<=";
        case Comparison::Ge: return ">=";
    }
    return "=";
}

}  // namespace

std::string firing_count_name(std::string_view transition) { return std::string(transition) + "@sigma"; }

std::string conjunction(const std::vector<std::string>& terms) { return nary("and", terms, "true"); }
std::string disjunction(const std::vector<std::string>& terms) { return nary("or", terms, "false"); }
std::string negation(const std::string& term) { return "(not " + term + ")"; }

std::string integer(Tokens value) {
    std::string digits = std::to_string(value);
    if (value < 0) return "(- " + digits.substr(1) + ")";
    return digits;
}

std::string encode_linear(const LinearExpr& e, const StepVars& vars) {
    std::vector<std::string> parts;
    for (const auto& t : e.terms()) parts.push_back(scaled(t.coefficient, vars.var(t.place)));
    if (e.constant() != 0 || parts.empty()) parts.push_back(integer(e.constant()));
    return nary("+", parts, "0");
}

void declare_places(smt::SolverSession& s, const PetriNet& net, const StepVars& vars) {
    for (const auto& p : net.place_names()) s.declare_int(vars.name(p));
}

void declare_places(smt::SolverSession& s, const std::vector<std::string>& places, const StepVars& vars) {
    for (const auto& p : places) s.declare_int(vars.name(p));
}

std::string encode_nonneg(const std::vector<std::string>& places, const StepVars& vars) {
    std::vector<std::string> conj;
    for (const auto& p : places) conj.push_back("(>= " + vars.var(p) + " 0)");
    return conjunction(conj);
}

std::string encode_nonneg(const PetriNet& net, const StepVars& vars) { return encode_nonneg(net.place_names(), vars); }

std::string encode_marking(const PetriNet& net, const Marking& m, const StepVars& vars) {
    std::vector<std::string> conj;
    for (PlaceId p = 0; p < net.place_count(); ++p)
        conj.push_back("(= " + vars.var(net.place_name(p)) + " " + integer(m[p]) + ")");
    return conjunction(conj);
}

std::string encode_initial(const PetriNet& net, const StepVars& vars) {
    return encode_marking(net, net.initial_marking(), vars);
}

std::string encode_step(const PetriNet& net, const StepVars& from, const StepVars& to) {
    if (from.tag() == to.tag()) throw UsageError("encode_step needs distinct steps");
    std::vector<std::string> disjuncts;
    for (TransitionId t = 0; t < net.transition_count(); ++t) {
        std::vector<std::string> conj;
        for (const auto& arc : net.pre(t))
            conj.push_back("(>= " + from.var(net.place_name(arc.place)) + " " + integer(arc.weight) + ")");
        for (PlaceId p = 0; p < net.place_count(); ++p) {
            Tokens delta = net.post_weight(t, p) - net.pre_weight(t, p);
            const std::string& name = net.place_name(p);
            std::string before = from.var(name);
            std::string rhs = delta == 0  ? before
                              : delta > 0 ? "(+ " + before + " " + integer(delta) + ")"
                                          : "(- " + before + " " + integer(-delta) + ")";
            conj.push_back("(= " + to.var(name) + " " + rhs + ")");
        }
        disjuncts.push_back(conjunction(conj));
    }
    return disjunction(disjuncts);
}

std::string encode_bool(const BoolExpr& f, const StepVars& vars) {
    using K = BoolExpr::Kind;
    switch (f.kind()) {
        case K::Constant: return f.constant_value() ? "true" : "false";
        case K::Atom: {
            const Atom& a = f.as_atom();
            return "(" + std::string(comparison(a.op)) + " " + encode_linear(a.lhs, vars) + " " +
                   encode_linear(a.rhs, vars) + ")";
        }
        case K::Not: return negation(encode_bool(f.children().front(), vars));
        case K::And:
        case K::Or: {
            std::vector<std::string> parts;
            for (const auto& c : f.children()) parts.push_back(encode_bool(c, vars));
            std::string out = f.kind() == K::And ? "(and" : "(or";
            for (const auto& p : parts) out += " " + p;
            return out + ")";
        }
    }
    return "true";
}

// ---------------------------------------------------------------------------

StateEquationSystem::StateEquationSystem(const PetriNet& net) : rows_(net.place_count()) {
    for (TransitionId t = 0; t < net.transition_count(); ++t) {
        std::map<PlaceId, Tokens> delta;
        for (const auto& a : net.post(t)) delta[a.place] += a.weight;
        for (const auto& a : net.pre(t)) delta[a.place] -= a.weight;
        for (const auto& [p, d] : delta)
            if (d != 0) rows_[p].emplace_back(t, d);
    }
}

Tokens StateEquationSystem::incidence(PlaceId p, TransitionId t) const {
    for (const auto& [tt, c] : rows_.at(p))
        if (tt == t) return c;
    return 0;
}

void declare_firing_counts(smt::SolverSession& s, const PetriNet& net) {
    for (TransitionId t = 0; t < net.transition_count(); ++t) s.declare_int(firing_count_name(net.transition_name(t)));
}

std::string encode_state_equation(const PetriNet& net, const StepVars& marking) {
    StateEquationSystem system(net);
    std::vector<std::string> conj;
    for (PlaceId p = 0; p < net.place_count(); ++p) {
        std::vector<std::string> sum;
        Tokens m0 = net.initial_marking()[p];
        if (m0 != 0 || system.row(p).empty()) sum.push_back(integer(m0));
        for (const auto& [t, c] : system.row(p))
            sum.push_back(scaled(c, smt::symbol(firing_count_name(net.transition_name(t)))));
        std::string rhs = sum.size() == 1 ? sum.front() : nary("+", sum, "0");
        conj.push_back("(= " + marking.var(net.place_name(p)) + " " + rhs + ")");
    }
    for (TransitionId t = 0; t < net.transition_count(); ++t)
        conj.push_back("(>= " + smt::symbol(firing_count_name(net.transition_name(t))) + " 0)");
    for (PlaceId p = 0; p < net.place_count(); ++p) conj.push_back("(>= " + marking.var(net.place_name(p)) + " 0)");
    return conjunction(conj);
}

// ---------------------------------------------------------------------------

std::optional<std::vector<PlaceId>> find_trap(smt::SolverSession& s, const PetriNet& net, const Marking& candidate) {
    const StepVars selector("trap");
    std::vector<std::string> marked;
    for (PlaceId p = 0; p < net.place_count(); ++p)
        if (net.initial_marking()[p] > 0 && candidate[p] == 0) marked.push_back(selector.var(net.place_name(p)));
    if (marked.empty()) return std::nullopt;

    s.push();
    for (const auto& p : net.place_names()) s.declare_bool(selector.name(p));
    s.assert_formula(disjunction(marked));
    for (PlaceId p = 0; p < net.place_count(); ++p)
        if (candidate[p] > 0) s.assert_formula(negation(selector.var(net.place_name(p))));
    for (TransitionId t = 0; t < net.transition_count(); ++t) {
        std::vector<std::string> outputs;
        for (const auto& a : net.post(t)) outputs.push_back(selector.var(net.place_name(a.place)));
        for (const auto& a : net.pre(t))
            s.assert_formula("(=> " + selector.var(net.place_name(a.place)) + " " + disjunction(outputs) + ")");
    }
    auto result = s.check();
    std::optional<std::vector<PlaceId>> trap;
    if (result.sat()) {
        std::vector<PlaceId> places;
        for (PlaceId p = 0; p < net.place_count(); ++p)
            if (result.value(selector.name(net.place_name(p))) != 0) places.push_back(p);
        trap = std::move(places);
    }
    if (s.alive()) s.pop();
    return trap;
}

bool is_trap(const PetriNet& net, std::span<const PlaceId> places) {
    std::vector<bool> in(net.place_count(), false);
    for (auto p : places) in.at(p) = true;
    for (TransitionId t = 0; t < net.transition_count(); ++t) {
        bool consumes = std::any_of(net.pre(t).begin(), net.pre(t).end(), [&](const Arc& a) { return in[a.place]; });
        if (!consumes) continue;
        bool produces = std::any_of(net.post(t).begin(), net.post(t).end(), [&](const Arc& a) { return in[a.place]; });
        if (!produces) return false;
    }
    return true;
}

std::string trap_constraint(const PetriNet& net, std::span<const PlaceId> places, const StepVars& vars) {
    if (places.empty()) throw UsageError("trap constraint over an empty place set");
    std::vector<std::string> sum;
    for (auto p : places) sum.push_back(vars.var(net.place_name(p)));
    return "(>= " + nary("+", sum, "0") + " 1)";
}

std::string encode_reduction(const ReductionSystem& e, const StepVars& original, const StepVars& reduced) {
    auto var_of = [&](const std::string& name) { return e.is_original(name) ? original : reduced; };
    auto side = [&](const LinearExpr& expr) {
        std::vector<std::string> parts;
        for (const auto& t : expr.terms()) parts.push_back(scaled(t.coefficient, var_of(t.place).var(t.place)));
        if (expr.constant() != 0 || parts.empty()) parts.push_back(integer(expr.constant()));
        return nary("+", parts, "0");
    };
    std::vector<std::string> conj;
    for (const auto& eq : e.equations) conj.push_back("(= " + side(eq.lhs) + " " + side(eq.rhs) + ")");
    if (original.tag() != reduced.tag())
        for (const auto& p : e.original_places)
            if (e.is_reduced(p)) conj.push_back("(= " + original.var(p) + " " + reduced.var(p) + ")");
    for (const auto& p : e.original_places) conj.push_back("(>= " + original.var(p) + " 0)");
    return conjunction(conj);
}

// ---------------------------------------------------------------------------

Marking marking_from_model(const PetriNet& net, const smt::SmtResult& model, const StepVars& vars) {
    std::vector<Marking::Entry> entries;
    for (PlaceId p = 0; p < net.place_count(); ++p) {
        Tokens v = model.value(vars.name(net.place_name(p)));
        if (v < 0) throw SolverError("negative marking in model");
        if (v > 0) entries.emplace_back(p, v);
    }
    return Marking(std::move(entries));
}

std::optional<TransitionId> transition_between(const PetriNet& net, const Marking& from, const Marking& to) {
    for (TransitionId t = 0; t < net.transition_count(); ++t)
        if (is_enabled(net, from, t) && fire(net, from, t) == to) return t;
    return std::nullopt;
}

Trace trace_from_model(const PetriNet& net, const smt::SmtResult& model, int depth) {
    Trace trace;
    trace.markings.push_back(marking_from_model(net, model, StepVars(0)));
    for (int k = 1; k <= depth; ++k) {
        Marking next = marking_from_model(net, model, StepVars(k));
        auto t = transition_between(net, trace.markings.back(), next);
        if (!t) throw SolverError("model step " + std::to_string(k) + " is not a firing");
        trace.transitions.push_back(*t);
        trace.markings.push_back(std::move(next));
    }
    return trace;
}

}  // namespace pnreach::enc
