#include "pnreach/reducer.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace pnreach {

namespace {

struct Work {
    struct Place {
        std::string name;
        Tokens initial = 0;
        bool alive = true;
        bool fresh = false;
    };
    struct Transition {
        std::string name;
        std::map<std::size_t, Tokens> pre, post;
        bool alive = true;
    };

    std::vector<Place> places;
    std::vector<Transition> transitions;
    std::vector<Equation> equations;
    /// Fresh place -> its value as a sum over original places.
    std::map<std::string, LinearExpr> definitions;
    std::set<std::string> taken;

    explicit Work(const PetriNet& net) {
        for (PlaceId p = 0; p < net.place_count(); ++p) {
            places.push_back({net.place_name(p), net.initial_marking()[p]});
            taken.insert(net.place_name(p));
        }
        for (TransitionId t = 0; t < net.transition_count(); ++t) {
            Transition tr{net.transition_name(t), {}, {}};
            for (const auto& a : net.pre(t)) tr.pre[a.place] = a.weight;
            for (const auto& a : net.post(t)) tr.post[a.place] = a.weight;
            transitions.push_back(std::move(tr));
            taken.insert(net.transition_name(t));
        }
    }

    static Tokens weight(const std::map<std::size_t, Tokens>& arcs, std::size_t p) {
        auto it = arcs.find(p);
        return it == arcs.end() ? 0 : it->second;
    }

    /// Alive places sorted by name.
    std::vector<std::size_t> alive_places() const {
        std::vector<std::size_t> out;
        for (std::size_t p = 0; p < places.size(); ++p)
            if (places[p].alive) out.push_back(p);
        std::sort(out.begin(), out.end(), [&](auto a, auto b) { return places[a].name < places[b].name; });
        return out;
    }

    LinearExpr value_of(std::size_t p) const {
        const auto& name = places[p].name;
        if (places[p].fresh) return definitions.at(name);
        return LinearExpr::place(name);
    }

    /// Eliminates a fresh place from the recorded equations once it is gone.
    void retire(std::size_t p) {
        places[p].alive = false;
        for (auto& t : transitions) {
            t.pre.erase(p);
            t.post.erase(p);
        }
        if (!places[p].fresh) return;
        const auto& name = places[p].name;
        const LinearExpr& def = definitions.at(name);
        for (auto& eq : equations) {
            eq.lhs = eq.lhs.substitute(name, def);
            eq.rhs = eq.rhs.substitute(name, def);
        }
    }

    std::string fresh_name(const std::string& a, const std::string& b) {
        std::string base = a + "_" + b;
        std::string name = base;
        for (int i = 1; taken.count(name); ++i) name = base + "_" + std::to_string(i);
        taken.insert(name);
        return name;
    }

    bool no_effect(const Transition& t) const { return t.pre == t.post; }

    // R1: constant places, plus removal of transitions that never fire or change nothing.
    bool constant_places() {
        bool changed = false;
        for (std::size_t p : alive_places()) {
            bool constant = std::all_of(transitions.begin(), transitions.end(), [&](const Transition& t) {
                return !t.alive || weight(t.pre, p) == weight(t.post, p);
            });
            if (!constant) continue;
            for (auto& t : transitions)
                if (t.alive && weight(t.pre, p) > places[p].initial) t.alive = false;
            equations.push_back({value_of(p), LinearExpr(places[p].initial)});
            retire(p);
            changed = true;
        }
        for (auto& t : transitions)
            if (t.alive && no_effect(t)) {
                t.alive = false;
                changed = true;
            }
        return changed;
    }

    bool same_columns(std::size_t p, std::size_t q) const {
        return std::all_of(transitions.begin(), transitions.end(), [&](const Transition& t) {
            return !t.alive || (weight(t.pre, p) == weight(t.pre, q) && weight(t.post, p) == weight(t.post, q));
        });
    }

    // R2: duplicate places. The copy with more initial tokens goes (the later name on ties).
    bool duplicate_places() {
        bool changed = false;
        auto order = alive_places();
        for (std::size_t i = 0; i < order.size(); ++i) {
            std::size_t q = order[i];
            if (!places[q].alive) continue;
            for (std::size_t j = i + 1; j < order.size(); ++j) {
                std::size_t p = order[j];
                if (!places[p].alive || !same_columns(p, q)) continue;
                std::size_t keep = q, drop = p;
                if (places[p].initial < places[q].initial) std::swap(keep, drop);
                Tokens c = places[drop].initial - places[keep].initial;
                equations.push_back({value_of(drop), LinearExpr::place(places[keep].name) + LinearExpr(c)});
                retire(drop);
                changed = true;
                if (drop == q) break;
            }
        }
        return changed;
    }

    // R3: t moves one token from p to q, nothing else consumes p or produces into q,
    // and q starts empty; p and q merge into one place.
    bool chain_agglomeration() {
        for (std::size_t ti = 0; ti < transitions.size(); ++ti) {
            const Transition& t = transitions[ti];
            if (!t.alive || t.pre.size() != 1 || t.post.size() != 1) continue;
            auto [p, wp] = *t.pre.begin();
            auto [q, wq] = *t.post.begin();
            if (p == q || wp != 1 || wq != 1 || places[q].initial != 0) continue;
            bool sole = true;
            for (std::size_t ui = 0; ui < transitions.size() && sole; ++ui) {
                if (ui == ti || !transitions[ui].alive) continue;
                if (weight(transitions[ui].pre, p) > 0 || weight(transitions[ui].post, q) > 0) sole = false;
            }
            if (!sole) continue;

            std::string name = fresh_name(places[p].name, places[q].name);
            definitions[name] = value_of(p) + value_of(q);
            places.push_back({name, places[p].initial + places[q].initial, true, true});
            std::size_t x = places.size() - 1;
            transitions[ti].alive = false;
            for (auto& u : transitions) {
                if (!u.alive) continue;
                for (auto* arcs : {&u.pre, &u.post}) {
                    Tokens w = weight(*arcs, p) + weight(*arcs, q);
                    if (w > 0) (*arcs)[x] = w;
                }
            }
            retire(p);
            retire(q);
            return true;
        }
        return false;
    }

    Reduction finish(const PetriNet& original) {
        for (const auto& pl : places)
            if (pl.alive && pl.fresh)
                equations.push_back({LinearExpr::place(pl.name), definitions.at(pl.name)});

        Reduction r;
        r.net.set_name(original.name());
        std::vector<PlaceId> id(places.size());
        for (std::size_t p = 0; p < places.size(); ++p)
            if (places[p].alive) id[p] = r.net.add_place(places[p].name, places[p].initial);
        for (const auto& t : transitions) {
            if (!t.alive) continue;
            TransitionId nt = r.net.add_transition(t.name);
            for (const auto& [p, w] : t.pre) r.net.add_pre(nt, id[p], w);
            for (const auto& [p, w] : t.post) r.net.add_post(nt, id[p], w);
        }
        r.system.original_places = original.place_names();
        r.system.reduced_places = r.net.place_names();
        r.system.equations = std::move(equations);
        return r;
    }
};

}  // namespace

Reduction reduce(const PetriNet& net) {
    Work w(net);
    for (bool changed = true; changed;) {
        changed = w.constant_places();
        changed = w.duplicate_places() || changed;
        changed = w.chain_agglomeration() || changed;
    }
    return w.finish(net);
}

double reduction_ratio(const PetriNet& original, const PetriNet& reduced) {
    if (original.place_count() == 0) return 0.0;
    return static_cast<double>(original.place_count() - reduced.place_count()) /
           static_cast<double>(original.place_count());
}

BoolExpr transform_query(const BoolExpr& goal, const ReductionSystem& system) {
    std::vector<BoolExpr> conj{goal};
    for (const auto& eq : system.equations) conj.push_back(BoolExpr::atom(eq.lhs, Comparison::Eq, eq.rhs));
    for (const auto& p : system.removed_places())
        conj.push_back(BoolExpr::atom(LinearExpr::place(p), Comparison::Ge, LinearExpr(0)));
    return BoolExpr::conjunction(std::move(conj));
}

}  // namespace pnreach
