#include "pnreach/checkers.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <deque>
#include <random>
#include <unordered_map>

#include "pnreach/certificates.hpp"
#include "pnreach/encodings.hpp"
#include "pnreach/error.hpp"
#include "pnreach/pdr.hpp"
#include "pnreach/reducer.hpp"

namespace pnreach {

std::string_view label(Technique t) {
    switch (t) {
        case Technique::Induction: return "INDUCTION";
        case Technique::Bmc: return "BMC";
        case Technique::KInduction: return "K_INDUCTION";
        case Technique::Pdr: return "PDR";
        case Technique::StateEquation: return "STATE_EQUATION";
        case Technique::RandomWalk: return "RANDOM_WALK";
        case Technique::Cp: return "CP";
        case Technique::Enumeration: return "ENUMERATION";
    }
    return "UNKNOWN";
}

std::optional<Technique> parse_technique(std::string_view text) {
    std::string key;
    for (char c : text) key += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (auto t : all_techniques)
        if (label(t) == key) return t;
    return std::nullopt;
}

namespace checkers {

namespace {

using enc::StepVars;

Verdict make_verdict(const CheckContext& ctx, const Goal& goal, Technique technique, bool reachable) {
    Verdict v;
    v.query_id = ctx.query.id;
    v.technique = technique;
    v.goal_reachable = reachable;
    v.answer = goal.answer(reachable);
    return v;
}

/// Original-net marking read from a model where original places live at `vars`.
Marking original_marking(const PetriNet& net, const smt::SmtResult& model, const StepVars& vars) {
    return enc::marking_from_model(net, model, vars);
}

/// The goal over the variables of the solved net: plain, or joined with E when reduced.
struct SolvedNet {
    const PetriNet& net;
    const ReductionSystem* system;
    BoolExpr goal;
};

SolvedNet solved_net(const CheckContext& ctx, const BoolExpr& goal, bool use_reduction) {
    if (use_reduction && ctx.reduction)
        return {ctx.reduction->net, &ctx.reduction->system, transform_query(goal, ctx.reduction->system)};
    return {ctx.net, nullptr, goal};
}

/// Declares the removed original places at `vars`, when working on a reduced net.
void declare_removed(smt::SolverSession& s, const SolvedNet& sn, const StepVars& vars) {
    if (sn.system) enc::declare_places(s, sn.system->removed_places(), vars);
}

std::string negated_goal(const BoolExpr& goal, const StepVars& vars) {
    return enc::encode_bool(push_negations(!goal), vars);
}

bool stop_requested(const CheckContext& ctx) { return ctx.stop.stop_requested(); }

// ---------------------------------------------------------------------------

std::optional<Verdict> induction_impl(const CheckContext& ctx) {
    const Goal goal = normalize(ctx.query);
    const StepVars s0(0), s1(1);
    smt::SolverSession s(ctx.solver, ctx.stop);
    enc::declare_places(s, ctx.net, s0);

    s.push();
    s.assert_formula(enc::encode_initial(ctx.net, s0));
    s.assert_formula(enc::encode_bool(goal.formula, s0));
    auto base = s.check(false);
    if (base.unknown()) return std::nullopt;
    if (base.sat()) {
        Verdict v = make_verdict(ctx, goal, Technique::Induction, true);
        v.trace = replay(ctx.net, {});
        v.witness = ctx.net.initial_marking();
        return v;
    }
    s.pop();

    enc::declare_places(s, ctx.net, s1);
    s.assert_formula(enc::encode_nonneg(ctx.net, s0));
    s.assert_formula(negated_goal(goal.formula, s0));
    s.assert_formula(enc::encode_step(ctx.net, s0, s1));
    s.assert_formula(enc::encode_bool(goal.formula, s1));
    auto step = s.check(false);
    if (!step.unsat()) return std::nullopt;

    Verdict v = make_verdict(ctx, goal, Technique::Induction, false);
    v.certificate = Certificate{Certificate::Kind::InductiveInvariant, push_negations(!goal.formula), {}, 0};
    return v;
}

// ---------------------------------------------------------------------------

/// Incremental unrolling init@0 /\ step(0,1) /\ ... /\ step(k-1,k) of one net.
class Unrolling {
public:
    Unrolling(const CheckContext& ctx, const SolvedNet& sn) : ctx_(ctx), sn_(sn) { reset(); }

    int depth() const noexcept { return depth_; }
    smt::SolverSession& session() { return *session_; }

    void reset() {
        session_ = std::make_unique<smt::SolverSession>(ctx_.solver, ctx_.stop);
        depth_ = 0;
        enc::declare_places(*session_, sn_.net, StepVars(0));
        session_->assert_formula(enc::encode_initial(sn_.net, StepVars(0)));
    }

    void deepen() {
        const StepVars from(depth_), to(depth_ + 1);
        enc::declare_places(*session_, sn_.net, to);
        session_->assert_formula(enc::encode_step(sn_.net, from, to));
        ++depth_;
    }

    void extend_to(int depth) {
        while (depth_ < depth) deepen();
    }

    /// SAT(unrolling /\ goal@depth), inside a push/pop.
    smt::SmtResult check_goal_at_depth() {
        const StepVars at(depth_);
        session_->push();
        declare_removed(*session_, sn_, at);
        session_->assert_formula(enc::encode_bool(sn_.goal, at));
        auto result = session_->check(true);
        if (session_->alive()) session_->pop();
        return result;
    }

private:
    const CheckContext& ctx_;
    const SolvedNet& sn_;
    std::unique_ptr<smt::SolverSession> session_;
    int depth_ = 0;
};

Verdict bmc_verdict(const CheckContext& ctx, const Goal& goal, const SolvedNet& sn, const smt::SmtResult& model,
                    int depth, Technique technique) {
    Verdict v = make_verdict(ctx, goal, technique, true);
    v.trace = enc::trace_from_model(sn.net, model, depth);
    if (sn.system) {
        v.trace_on_reduced_net = true;
        v.witness = original_marking(ctx.net, model, StepVars(depth));
    } else {
        v.witness = v.trace->final_marking();
    }
    return v;
}

/// Checks the goal at increasing depths up to `max_depth` (negative: no limit).
/// Returns the first model found, with its depth, or nullopt.
std::optional<std::pair<smt::SmtResult, int>> unroll_until_goal(const CheckContext& ctx, Unrolling& u, int max_depth,
                                                                bool* retried) {
    while (max_depth < 0 || u.depth() <= max_depth) {
        if (stop_requested(ctx)) return std::nullopt;
        auto r = u.check_goal_at_depth();
        if (r.sat()) return std::make_pair(std::move(r), u.depth());
        if (r.unknown()) {
            if (stop_requested(ctx) || *retried) return std::nullopt;
            *retried = true;
            int next = u.depth() + 1;
            u.reset();
            u.extend_to(next);
            continue;
        }
        if (max_depth >= 0 && u.depth() == max_depth) break;
        u.deepen();
    }
    return std::nullopt;
}

std::optional<Verdict> bmc_impl(const CheckContext& ctx) {
    const Goal goal = normalize(ctx.query);
    const SolvedNet sn = solved_net(ctx, goal.formula, true);
    Unrolling u(ctx, sn);
    bool retried = false;
    auto found = unroll_until_goal(ctx, u, ctx.options.bmc_max_depth, &retried);
    if (!found) return std::nullopt;
    return bmc_verdict(ctx, goal, sn, found->first, found->second, Technique::Bmc);
}

// ---------------------------------------------------------------------------

std::optional<Verdict> k_induction_impl(const CheckContext& ctx) {
    const Goal goal = normalize(ctx.query);
    const SolvedNet sn = solved_net(ctx, goal.formula, false);
    Unrolling base(ctx, sn);

    // Step session: nonneg@0 /\ notG@0..k /\ step(0..k+1), checked against G@k+1.
    smt::SolverSession step(ctx.solver, ctx.stop);
    enc::declare_places(step, ctx.net, StepVars(0));
    step.assert_formula(enc::encode_nonneg(ctx.net, StepVars(0)));
    int step_depth = -1;  // steps 0..step_depth carry notG

    bool retried = false;
    for (int k = 0; ctx.options.k_induction_max_depth < 0 || k <= ctx.options.k_induction_max_depth; ++k) {
        if (stop_requested(ctx)) return std::nullopt;
        base.extend_to(k);
        auto r = base.check_goal_at_depth();
        if (r.unknown()) {
            // The base case at depth k must be decided before the step case may conclude.
            if (stop_requested(ctx) || retried) return std::nullopt;
            retried = true;
            base.reset();
            base.extend_to(k);
            r = base.check_goal_at_depth();
            if (r.unknown()) return std::nullopt;
        }
        if (r.sat()) return bmc_verdict(ctx, goal, sn, r, k, Technique::KInduction);

        while (step_depth < k) {
            ++step_depth;
            const StepVars at(step_depth), next(step_depth + 1);
            step.assert_formula(negated_goal(goal.formula, at));
            enc::declare_places(step, ctx.net, next);
            step.assert_formula(enc::encode_step(ctx.net, at, next));
        }
        step.push();
        step.assert_formula(enc::encode_bool(goal.formula, StepVars(k + 1)));
        auto inductive = step.check(false);
        if (inductive.unknown()) return std::nullopt;
        step.pop();
        if (inductive.unsat()) {
            Verdict v = make_verdict(ctx, goal, Technique::KInduction, false);
            Certificate c;
            c.kind = Certificate::Kind::KInductionObligation;
            c.depth = k;
            c.invariant = push_negations(!goal.formula);
            c.obligation = k_induction_script(ctx.net, goal.formula, k);
            v.certificate = std::move(c);
            return v;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

std::optional<Verdict> pdr_impl(const CheckContext& ctx) {
    const Goal goal = normalize(ctx.query);
    if (!PdrEngine::is_coverability_goal(goal.formula)) return std::nullopt;
    PdrEngine engine(ctx.net, goal.formula, ctx.solver, ctx.stop, ctx.options.pdr_max_frames);
    switch (engine.run()) {
        case PdrEngine::Outcome::Reachable: {
            Verdict v = make_verdict(ctx, goal, Technique::Pdr, true);
            v.trace = engine.trace();
            v.witness = v.trace->final_marking();
            return v;
        }
        case PdrEngine::Outcome::Unreachable: {
            Verdict v = make_verdict(ctx, goal, Technique::Pdr, false);
            v.certificate = Certificate{Certificate::Kind::InductiveInvariant, engine.invariant(), {}, 0};
            return v;
        }
        default: return std::nullopt;
    }
}

// ---------------------------------------------------------------------------

std::optional<Verdict> state_equation_impl(const CheckContext& ctx) {
    const Goal goal = normalize(ctx.query);
    auto report = refine_state_equation(ctx, goal.formula);
    if (report.status != StateEquationReport::Status::Unreachable) return std::nullopt;
    return make_verdict(ctx, goal, Technique::StateEquation, false);
}

// ---------------------------------------------------------------------------

std::optional<Verdict> random_walk_impl(const CheckContext& ctx) {
    const Goal goal = normalize(ctx.query);
    const BoundFormula g(ctx.net, goal.formula);
    const auto& opt = ctx.options;
    std::mt19937_64 rng(opt.walk_seed);
    const auto started = std::chrono::steady_clock::now();
    std::uint64_t steps = 0;

    auto out_of_budget = [&] {
        if (opt.walk_max_steps != 0 && steps >= opt.walk_max_steps) return true;
        if ((steps & 0xff) == 0) {
            if (stop_requested(ctx)) return true;
            if (opt.walk_time_budget.count() > 0 && std::chrono::steady_clock::now() - started >= opt.walk_time_budget)
                return true;
        }
        return false;
    };

    for (;;) {
        Marking m = ctx.net.initial_marking();
        std::vector<TransitionId> path;
        for (;;) {
            if (g.holds(m)) {
                Verdict v = make_verdict(ctx, goal, Technique::RandomWalk, true);
                v.trace = replay(ctx.net, std::move(path));
                v.witness = v.trace->final_marking();
                return v;
            }
            if (out_of_budget()) return std::nullopt;
            auto enabled = enabled_transitions(ctx.net, m);
            if (enabled.empty() || path.size() >= opt.walk_max_length) break;
            std::uniform_int_distribution<std::size_t> pick(0, enabled.size() - 1);
            TransitionId t = enabled[pick(rng)];
            m = fire(ctx.net, m, t);
            path.push_back(t);
            ++steps;
        }
        ++steps;  // a restart costs a step, so dead initial markings still exhaust a step budget
    }
}

// ---------------------------------------------------------------------------

std::optional<Verdict> cp_impl(const CheckContext& ctx) {
    if (!ctx.reduction) return std::nullopt;
    const PetriNet& reduced = ctx.reduction->net;
    if (!enabled_transitions(reduced, reduced.initial_marking()).empty()) return std::nullopt;

    const Goal goal = normalize(ctx.query);
    const SolvedNet sn = solved_net(ctx, goal.formula, true);
    const StepVars v0(0);
    smt::SolverSession s(ctx.solver, ctx.stop);
    enc::declare_places(s, reduced, v0);
    declare_removed(s, sn, v0);
    s.assert_formula(enc::encode_initial(reduced, v0));
    s.assert_formula(enc::encode_bool(sn.goal, v0));
    auto r = s.check(true);
    if (r.unknown()) return std::nullopt;
    Verdict v = make_verdict(ctx, goal, Technique::Cp, r.sat());
    if (r.sat()) v.witness = original_marking(ctx.net, r, v0);
    return v;
}

// ---------------------------------------------------------------------------

struct Search {
    std::vector<Marking> states;
    std::vector<std::pair<std::uint32_t, TransitionId>> parent;  // parent state and transition
    std::optional<std::uint32_t> hit;
    bool complete = false;
};

/// Breadth-first search stopping at the first state satisfying `goal` (if any).
Search breadth_first(const PetriNet& net, std::size_t cap, const std::stop_token& stop, const BoundFormula* goal) {
    Search s;
    std::unordered_map<Marking, std::uint32_t, MarkingHash> index;
    auto discover = [&](Marking m, std::uint32_t from, TransitionId t) {
        auto [it, inserted] = index.emplace(m, static_cast<std::uint32_t>(s.states.size()));
        if (!inserted) return false;
        s.states.push_back(std::move(m));
        s.parent.emplace_back(from, t);
        if (goal && goal->holds(s.states.back())) s.hit = it->second;
        return true;
    };
    discover(net.initial_marking(), 0, 0);
    for (std::size_t head = 0; head < s.states.size(); ++head) {
        if (s.hit) return s;
        if ((head & 0x3ff) == 0 && stop.stop_requested()) return s;
        for (TransitionId t = 0; t < net.transition_count(); ++t) {
            if (!is_enabled(net, s.states[head], t)) continue;
            discover(fire(net, s.states[head], t), static_cast<std::uint32_t>(head), t);
            if (s.hit) return s;
            if (s.states.size() > cap) return s;
        }
    }
    s.complete = true;
    return s;
}

std::optional<Verdict> enumeration_impl(const CheckContext& ctx) {
    const Goal goal = normalize(ctx.query);
    const BoundFormula g(ctx.net, goal.formula);
    Search s = breadth_first(ctx.net, ctx.options.enumeration_state_cap, ctx.stop, &g);
    if (s.hit) {
        std::vector<TransitionId> path;
        for (std::uint32_t at = *s.hit; at != 0; at = s.parent[at].first) path.push_back(s.parent[at].second);
        std::reverse(path.begin(), path.end());
        Verdict v = make_verdict(ctx, goal, Technique::Enumeration, true);
        v.trace = replay(ctx.net, std::move(path));
        v.witness = v.trace->final_marking();
        return v;
    }
    if (!s.complete) return std::nullopt;
    return make_verdict(ctx, goal, Technique::Enumeration, false);
}

}  // namespace

// ---------------------------------------------------------------------------

StateEquationReport refine_state_equation(const CheckContext& ctx, const BoolExpr& goal) {
    StateEquationReport report;
    const SolvedNet sn = solved_net(ctx, goal, true);
    const StepVars m("0");
    smt::SolverSession s(ctx.solver, ctx.stop);
    enc::declare_places(s, sn.net, m);
    declare_removed(s, sn, m);
    enc::declare_firing_counts(s, sn.net);
    s.assert_formula(enc::encode_state_equation(sn.net, m));
    s.assert_formula(enc::encode_bool(sn.goal, m));

    for (;;) {
        if (stop_requested(ctx)) return report;
        auto r = s.check(true);
        ++report.iterations;
        if (report.iterations == 1) report.plain_sat = r.sat();
        if (r.unsat()) {
            report.status = StateEquationReport::Status::Unreachable;
            return report;
        }
        if (r.unknown() || static_cast<int>(report.traps.size()) >= ctx.options.trap_cap) return report;
        Marking candidate = enc::marking_from_model(sn.net, r, m);
        auto trap = enc::find_trap(s, sn.net, candidate);
        if (!trap) return report;
        s.assert_formula(enc::trap_constraint(sn.net, *trap, m));
        report.traps.push_back(std::move(*trap));
    }
}

Exploration explore(const PetriNet& net, std::size_t cap, std::stop_token stop) {
    Search s = breadth_first(net, cap, stop, nullptr);
    return {std::move(s.states), s.complete};
}

std::optional<Verdict> induction(const CheckContext& ctx) { return induction_impl(ctx); }
std::optional<Verdict> bmc(const CheckContext& ctx) { return bmc_impl(ctx); }
std::optional<Verdict> k_induction(const CheckContext& ctx) { return k_induction_impl(ctx); }
std::optional<Verdict> pdr_coverability(const CheckContext& ctx) { return pdr_impl(ctx); }
std::optional<Verdict> state_equation(const CheckContext& ctx) { return state_equation_impl(ctx); }
std::optional<Verdict> random_walk(const CheckContext& ctx) { return random_walk_impl(ctx); }
std::optional<Verdict> cp_fully_reduced(const CheckContext& ctx) { return cp_impl(ctx); }
std::optional<Verdict> enumeration(const CheckContext& ctx) { return enumeration_impl(ctx); }

std::optional<Verdict> run(Technique technique, const CheckContext& ctx) {
    try {
        switch (technique) {
            case Technique::Induction: return induction(ctx);
            case Technique::Bmc: return bmc(ctx);
            case Technique::KInduction: return k_induction(ctx);
            case Technique::Pdr: return pdr_coverability(ctx);
            case Technique::StateEquation: return state_equation(ctx);
            case Technique::RandomWalk: return random_walk(ctx);
            case Technique::Cp: return cp_fully_reduced(ctx);
            case Technique::Enumeration: return enumeration(ctx);
        }
    } catch (const smt::Cancelled&) {
        return std::nullopt;
    } catch (const SolverError&) {
        if (ctx.stop.stop_requested()) return std::nullopt;
        throw;
    }
    return std::nullopt;
}

}  // namespace checkers
}  // namespace pnreach
