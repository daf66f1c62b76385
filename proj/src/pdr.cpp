#include "pnreach/pdr.hpp"

#include <algorithm>
#include <map>
#include <queue>

#include "pnreach/encodings.hpp"
#include "pnreach/error.hpp"

namespace pnreach {

namespace {

using enc::StepVars;

struct Undecided {};

bool upward(const LinearExpr& diff) {
    return std::all_of(diff.terms().begin(), diff.terms().end(), [](const LinearTerm& t) { return t.coefficient > 0; });
}

}  // namespace

PdrEngine::PdrEngine(const PetriNet& net, BoolExpr goal, smt::SolverConfig config, std::stop_token stop, int max_frames)
    : net_(net), goal_(std::move(goal)), config_(std::move(config)), stop_(std::move(stop)), max_frames_(max_frames) {}

bool PdrEngine::is_coverability_goal(const BoolExpr& goal) {
    using K = BoolExpr::Kind;
    switch (goal.kind()) {
        case K::Constant: return true;
        case K::Atom: {
            const Atom& a = goal.as_atom();
            if (a.op == Comparison::Ge) return upward(a.lhs - a.rhs);
            if (a.op == Comparison::Le) return upward(a.rhs - a.lhs);
            return false;
        }
        case K::Not: return false;
        case K::And:
        case K::Or:
            return std::all_of(goal.children().begin(), goal.children().end(),
                               [](const BoolExpr& c) { return is_coverability_goal(c); });
    }
    return false;
}

// ---------------------------------------------------------------------------

smt::SmtResult PdrEngine::solve(const std::vector<std::string>& assertions, bool with_model) {
    if (stop_.stop_requested()) throw Undecided{};
    ++queries_;
    session_->push();
    for (const auto& a : assertions) session_->assert_formula(a);
    auto r = session_->check(with_model);
    if (r.unknown()) throw Undecided{};
    session_->pop();
    return r;
}

std::vector<std::string> PdrEngine::frame_assertions(int level) const {
    if (level == 0) return {enc::encode_initial(net_, StepVars(0))};
    std::vector<std::string> out;
    for (std::size_t j = static_cast<std::size_t>(level); j < levels_.size(); ++j)
        for (const auto& c : levels_[j]) out.push_back(clause_term(c, 0));
    return out;
}

bool PdrEngine::satisfied_initially(const Cube& c) const {
    const Marking& m0 = net_.initial_marking();
    return std::all_of(c.begin(), c.end(), [&](const auto& e) { return m0[e.first] >= e.second; });
}

std::string PdrEngine::cube_term(const Cube& c, int step) const {
    const StepVars v(step);
    std::vector<std::string> conj;
    for (const auto& [p, b] : c) conj.push_back("(>= " + v.var(net_.place_name(p)) + " " + enc::integer(b) + ")");
    return enc::conjunction(conj);
}

std::string PdrEngine::clause_term(const Cube& c, int step) const {
    const StepVars v(step);
    std::vector<std::string> disj;
    for (const auto& [p, b] : c) disj.push_back("(<= " + v.var(net_.place_name(p)) + " " + enc::integer(b - 1) + ")");
    return enc::disjunction(disj);
}

BoolExpr PdrEngine::clause_formula(const Cube& c) const {
    std::vector<BoolExpr> disj;
    for (const auto& [p, b] : c)
        disj.push_back(BoolExpr::atom({LinearExpr::place(net_.place_name(p)), Comparison::Le, LinearExpr(b - 1)}));
    return BoolExpr::disjunction(std::move(disj));
}

std::vector<BoolExpr> PdrEngine::frames() const {
    std::vector<BoolExpr> out;
    for (std::size_t i = 1; i < levels_.size(); ++i) {
        std::vector<BoolExpr> conj;
        for (std::size_t j = i; j < levels_.size(); ++j)
            for (const auto& c : levels_[j]) conj.push_back(clause_formula(c));
        out.push_back(BoolExpr::conjunction(std::move(conj)));
    }
    return out;
}

// ---------------------------------------------------------------------------

bool PdrEngine::up_set_in_goal(const Cube& c) {
    return solve({cube_term(c, 0), not_goal_term_}, false).unsat();
}

bool PdrEngine::relatively_inductive(const Cube& c, int level) {
    if (satisfied_initially(c)) return false;
    auto assertions = frame_assertions(level - 1);
    assertions.push_back(clause_term(c, 0));
    assertions.push_back(step_term_);
    assertions.push_back(cube_term(c, 1));
    return solve(assertions, false).unsat();
}

namespace {

/// Lowers each bound of `c` (to zero means dropping the place) while `accept` holds.
template <typename Accept>
PdrEngine::Cube weaken(PdrEngine::Cube c, Accept accept) {
    for (std::size_t i = 0; i < c.size();) {
        auto candidate = c;
        candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(i));
        if (accept(candidate)) {
            c = std::move(candidate);
            continue;
        }
        Tokens lo = 0, hi = c[i].second;  // accept fails at lo, holds at hi
        while (hi - lo > 1) {
            Tokens mid = lo + (hi - lo) / 2;
            candidate = c;
            candidate[i].second = mid;
            if (accept(candidate))
                hi = mid;
            else
                lo = mid;
        }
        c[i].second = hi;
        ++i;
    }
    return c;
}

}  // namespace

PdrEngine::Cube PdrEngine::generalize_bad(const Marking& m) {
    Cube c;
    for (const auto& name : referenced_places(goal_)) {
        auto p = net_.find_place(name);
        if (p && m[*p] > 0) c.emplace_back(*p, m[*p]);
    }
    std::sort(c.begin(), c.end());
    return weaken(std::move(c), [&](const Cube& d) { return up_set_in_goal(d); });
}

PdrEngine::Cube PdrEngine::generalize(Cube c, int level) {
    return weaken(std::move(c), [&](const Cube& d) { return relatively_inductive(d, level); });
}

PdrEngine::Cube PdrEngine::predecessor_cube(const Cube& c, TransitionId t) const {
    std::map<PlaceId, Tokens> need;
    for (const auto& a : net_.pre(t)) need[a.place] = a.weight;
    for (const auto& [p, b] : c) {
        Tokens before = b + net_.pre_weight(t, p) - net_.post_weight(t, p);
        Tokens& slot = need[p];
        slot = std::max(slot, before);
    }
    Cube out;
    for (const auto& [p, b] : need)
        if (b > 0) out.emplace_back(p, b);
    return out;
}

bool PdrEngine::subsumed(const Cube& c, int level) const {
    auto covers = [&](const Cube& d) {
        return std::all_of(d.begin(), d.end(), [&](const auto& e) {
            auto it = std::lower_bound(c.begin(), c.end(), std::make_pair(e.first, Tokens{0}));
            return it != c.end() && it->first == e.first && it->second >= e.second;
        });
    };
    for (std::size_t j = static_cast<std::size_t>(level); j < levels_.size(); ++j)
        if (std::any_of(levels_[j].begin(), levels_[j].end(), covers)) return true;
    return false;
}

void PdrEngine::add_blocked(Cube c, int level) {
    auto weaker = [&](const Cube& e) {
        // up(e) is inside up(c): every bound of c is met by e.
        return std::all_of(c.begin(), c.end(), [&](const auto& b) {
            auto it = std::lower_bound(e.begin(), e.end(), std::make_pair(b.first, Tokens{0}));
            return it != e.end() && it->first == b.first && it->second >= b.second;
        });
    };
    for (int j = 1; j <= level; ++j) std::erase_if(levels_[j], weaker);
    levels_[level].push_back(std::move(c));
}

void PdrEngine::build_trace(const std::vector<Obligation>& obligations, std::size_t start, TransitionId first) {
    std::vector<TransitionId> path{first};
    for (std::optional<std::size_t> at = start; obligations[*at].parent; at = obligations[*at].parent)
        path.push_back(obligations[*at].via);
    trace_ = replay(net_, std::move(path));
    if (!BoundFormula(net_, goal_).holds(trace_.final_marking())) throw Error("PDR trace misses the goal");
}

bool PdrEngine::block(Cube bad, int k) {
    std::vector<Obligation> obligations{{std::move(bad), k, std::nullopt, 0}};
    using Entry = std::pair<int, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    queue.emplace(k, 0);

    while (!queue.empty()) {
        auto [level, index] = queue.top();
        queue.pop();
        const Cube cube = obligations[index].cube;
        if (subsumed(cube, level)) continue;

        auto assertions = frame_assertions(level - 1);
        assertions.push_back(clause_term(cube, 0));
        assertions.push_back(step_term_);
        assertions.push_back(cube_term(cube, 1));
        auto r = solve(assertions, true);
        if (r.sat()) {
            Marking before = enc::marking_from_model(net_, r, StepVars(0));
            Marking after = enc::marking_from_model(net_, r, StepVars(1));
            auto t = enc::transition_between(net_, before, after);
            if (!t) throw SolverError("PDR model is not a firing");
            Cube pre = predecessor_cube(cube, *t);
            if (satisfied_initially(pre)) {
                build_trace(obligations, index, *t);
                return false;
            }
            obligations.push_back({std::move(pre), level - 1, index, *t});
            queue.emplace(level - 1, obligations.size() - 1);
            queue.emplace(level, index);
        } else {
            add_blocked(generalize(cube, level), level);
            if (level < k) queue.emplace(level + 1, index);
        }
    }
    return true;
}

int PdrEngine::propagate(int k) {
    for (int i = 1; i <= k; ++i) {
        auto cubes = levels_[i];
        for (const auto& c : cubes) {
            auto assertions = frame_assertions(i);
            assertions.push_back(step_term_);
            assertions.push_back(cube_term(c, 1));
            if (solve(assertions, false).unsat()) {
                std::erase(levels_[i], c);
                levels_[i + 1].push_back(c);
            }
        }
        if (levels_[i].empty()) return i;
    }
    return 0;
}

PdrEngine::Outcome PdrEngine::run() {
    try {
        const StepVars s0(0), s1(1);
        session_.emplace(config_, stop_);
        enc::declare_places(*session_, net_, s0);
        enc::declare_places(*session_, net_, s1);
        session_->assert_formula(enc::encode_nonneg(net_, s0));
        step_term_ = enc::encode_step(net_, s0, s1);
        goal_term_ = enc::encode_bool(goal_, s0);
        not_goal_term_ = enc::encode_bool(push_negations(!goal_), s0);

        if (BoundFormula(net_, goal_).holds(net_.initial_marking())) {
            trace_ = replay(net_, {});
            return Outcome::Reachable;
        }
        levels_.assign(2, {});
        for (int k = 1;; ++k) {
            if (max_frames_ >= 0 && k > max_frames_) return Outcome::Unknown;
            for (;;) {
                auto assertions = frame_assertions(k);
                assertions.push_back(goal_term_);
                auto r = solve(assertions, true);
                if (r.unsat()) break;
                Cube bad = generalize_bad(enc::marking_from_model(net_, r, s0));
                if (!block(std::move(bad), k)) return Outcome::Reachable;
            }
            levels_.emplace_back();
            if (int fixed = propagate(k)) {
                std::vector<BoolExpr> conj;
                for (std::size_t j = static_cast<std::size_t>(fixed); j < levels_.size(); ++j)
                    for (const auto& c : levels_[j]) conj.push_back(clause_formula(c));
                invariant_ = BoolExpr::conjunction(std::move(conj));
                return Outcome::Unreachable;
            }
        }
    } catch (const Undecided&) {
        return Outcome::Unknown;
    } catch (const smt::Cancelled&) {
        return Outcome::Unknown;
    }
}

}  // namespace pnreach
