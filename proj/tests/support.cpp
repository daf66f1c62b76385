#include "support.hpp"

#include <unistd.h>

#include <algorithm>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <cctype>
#include <deque>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pnreach/parsers.hpp"
#include "pnreach/pdr.hpp"

namespace pnreach::test {

PetriNet make_net(const std::string& text) { return parse_net(text); }

PetriNet net_a() { return make_net("net NET-A\npl p (1)\npl q (0)\ntr t p -> q\n"); }
PetriNet net_b() { return make_net("net NET-B\npl p (1)\ntr t p -> p*2\n"); }
PetriNet net_c() { return make_net("net NET-C\npl a (1)\npl b (0)\ntr t1 a -> b\ntr t2 b -> a\n"); }
PetriNet net_d() { return make_net("net NET-D\npl a (1)\npl b (0)\ntr t1 a b -> b\n"); }

BoolExpr atom(const LinearExpr& lhs, Comparison op, Tokens c) { return BoolExpr::atom(lhs, op, LinearExpr(c)); }
BoolExpr ge(const std::string& p, Tokens c) { return atom(LinearExpr::place(p), Comparison::Ge, c); }
BoolExpr le(const std::string& p, Tokens c) { return atom(LinearExpr::place(p), Comparison::Le, c); }
BoolExpr eq(const std::string& p, Tokens c) { return atom(LinearExpr::place(p), Comparison::Eq, c); }

LinearExpr sum(std::initializer_list<std::string> places) {
    LinearExpr e;
    for (const auto& p : places) e += LinearExpr::place(p);
    return e;
}

Query ef(BoolExpr body, std::string id) { return {std::move(id), Quantifier::EF, std::move(body)}; }
Query ag(BoolExpr body, std::string id) { return {std::move(id), Quantifier::AG, std::move(body)}; }

std::filesystem::path corpus_dir() { return PNREACH_CORPUS_DIR; }

std::vector<CorpusEntry> load_corpus() {
    std::vector<CorpusEntry> out;
    std::vector<std::filesystem::path> nets;
    for (const auto& e : std::filesystem::directory_iterator(corpus_dir() / "nets")) nets.push_back(e.path());
    std::sort(nets.begin(), nets.end());
    for (const auto& path : nets) {
        CorpusEntry entry{path.stem().string(), path, load_net(path), {}};
        auto props = corpus_dir() / "properties" / (entry.name + ".xml");
        auto set = parse_mcc_properties(read_file(props), entry.net);
        if (!set.errors.empty()) throw std::runtime_error("corpus property error in " + props.string());
        entry.queries = std::move(set.queries);
        out.push_back(std::move(entry));
    }
    return out;
}

smt::SolverConfig solver() {
    smt::SolverConfig c;
    c.executable = PNREACH_TEST_SOLVER;
    c.arguments = smt::SolverConfig::default_arguments(c.executable);
    return c;
}

// ---------------------------------------------------------------------------

namespace {

constexpr Tokens omega = std::numeric_limits<Tokens>::max() / 4;

struct DenseNet {
    std::vector<Vec> pre, post;  // per transition, dense over places
};

DenseNet dense_net(const PetriNet& net) {
    DenseNet d;
    for (TransitionId t = 0; t < net.transition_count(); ++t) {
        Vec pre(net.place_count(), 0), post(net.place_count(), 0);
        for (PlaceId p = 0; p < net.place_count(); ++p) {
            pre[p] = net.pre_weight(t, p);
            post[p] = net.post_weight(t, p);
        }
        d.pre.push_back(std::move(pre));
        d.post.push_back(std::move(post));
    }
    return d;
}

bool enabled(const DenseNet& d, std::size_t t, const Vec& m) {
    for (std::size_t p = 0; p < m.size(); ++p)
        if (m[p] < d.pre[t][p]) return false;
    return true;
}

Vec fire_dense(const DenseNet& d, std::size_t t, const Vec& m) {
    Vec out = m;
    for (std::size_t p = 0; p < m.size(); ++p)
        if (out[p] != omega) out[p] = out[p] - d.pre[t][p] + d.post[t][p];
    return out;
}

Tokens linear_value(const PetriNet& net, const Vec& m, const LinearExpr& e) {
    Tokens v = e.constant();
    for (const auto& term : e.terms()) {
        auto p = net.find_place(term.place);
        if (!p) throw std::runtime_error("oracle: unknown place " + term.place);
        v += term.coefficient * m[*p];
    }
    return v;
}

}  // namespace

Vec dense(const PetriNet& net, const Marking& m) {
    Vec v(net.place_count(), 0);
    for (PlaceId p = 0; p < net.place_count(); ++p) v[p] = m[p];
    return v;
}

bool holds(const PetriNet& net, const Vec& m, const BoolExpr& f) {
    switch (f.kind()) {
        case BoolExpr::Kind::Constant: return f.constant_value();
        case BoolExpr::Kind::Atom: {
            const Atom& a = f.as_atom();
            Tokens l = linear_value(net, m, a.lhs), r = linear_value(net, m, a.rhs);
            return a.op == Comparison::Eq ? l == r : a.op == Comparison::Le ? l <= r : l >= r;
        }
        case BoolExpr::Kind::Not: return !holds(net, m, f.children().front());
        case BoolExpr::Kind::And:
            for (const auto& c : f.children())
                if (!holds(net, m, c)) return false;
            return true;
        case BoolExpr::Kind::Or:
            for (const auto& c : f.children())
                if (holds(net, m, c)) return true;
            return false;
    }
    return false;
}

std::optional<std::set<Vec>> reachable_set(const PetriNet& net, std::size_t cap) {
    DenseNet d = dense_net(net);
    std::set<Vec> seen;
    std::deque<Vec> frontier;
    Vec m0 = dense(net, net.initial_marking());
    seen.insert(m0);
    frontier.push_back(m0);
    while (!frontier.empty()) {
        Vec m = std::move(frontier.front());
        frontier.pop_front();
        for (std::size_t t = 0; t < d.pre.size(); ++t) {
            if (!enabled(d, t, m)) continue;
            Vec n = fire_dense(d, t, m);
            if (seen.insert(n).second) {
                if (seen.size() > cap) return std::nullopt;
                frontier.push_back(std::move(n));
            }
        }
    }
    return seen;
}

bool coverable(const PetriNet& net, const BoolExpr& goal) {
    DenseNet d = dense_net(net);
    auto big = [](const Vec& m) {
        Vec v = m;
        for (auto& x : v)
            if (x == omega) x = 1'000'000'000;
        return v;
    };
    struct Node {
        Vec label;
        int parent;
    };
    std::vector<Node> tree{{dense(net, net.initial_marking()), -1}};
    std::set<Vec> seen{tree[0].label};
    std::vector<int> work{0};
    while (!work.empty()) {
        int at = work.back();
        work.pop_back();
        if (holds(net, big(tree[at].label), goal)) return true;
        for (std::size_t t = 0; t < d.pre.size(); ++t) {
            if (!enabled(d, t, tree[at].label)) continue;
            Vec n = fire_dense(d, t, tree[at].label);
            for (int a = at; a >= 0; a = tree[a].parent) {
                const Vec& anc = tree[a].label;
                bool below = true, strict = false;
                for (std::size_t p = 0; p < n.size(); ++p) {
                    if (anc[p] > n[p]) below = false;
                    if (anc[p] < n[p]) strict = true;
                }
                if (below && strict)
                    for (std::size_t p = 0; p < n.size(); ++p)
                        if (anc[p] < n[p]) n[p] = omega;
            }
            if (!seen.insert(n).second) continue;
            tree.push_back({n, at});
            work.push_back(static_cast<int>(tree.size()) - 1);
        }
    }
    return false;
}

std::optional<bool> goal_reachable(const PetriNet& net, const BoolExpr& goal, std::size_t cap) {
    DenseNet d = dense_net(net);
    std::set<Vec> seen;
    std::deque<Vec> frontier;
    Vec m0 = dense(net, net.initial_marking());
    seen.insert(m0);
    frontier.push_back(m0);
    bool complete = true;
    while (!frontier.empty()) {
        Vec m = std::move(frontier.front());
        frontier.pop_front();
        if (holds(net, m, goal)) return true;
        for (std::size_t t = 0; t < d.pre.size(); ++t) {
            if (!enabled(d, t, m)) continue;
            Vec n = fire_dense(d, t, m);
            if (seen.count(n)) continue;
            if (seen.size() >= cap) {
                complete = false;
                continue;
            }
            seen.insert(n);
            frontier.push_back(std::move(n));
        }
    }
    if (complete) return false;
    if (PdrEngine::is_coverability_goal(goal)) return coverable(net, goal);
    return std::nullopt;
}

std::optional<bool> answer(const PetriNet& net, const Query& query, std::size_t cap) {
    BoolExpr goal = query.quantifier == Quantifier::EF ? query.body : BoolExpr::negation(query.body);
    goal = push_negations(goal);
    auto r = goal_reachable(net, goal, cap);
    if (!r) return std::nullopt;
    return query.quantifier == Quantifier::EF ? *r : !*r;
}

// ---------------------------------------------------------------------------
// SMT-LIB term evaluation

namespace {

struct Term {
    std::string atom;
    std::vector<Term> items;
    bool list = false;
};

struct TermReader {
    const std::string& s;
    std::size_t i = 0;

    void skip() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    Term read() {
        skip();
        if (i >= s.size()) throw std::runtime_error("eval_smt: unexpected end");
        if (s[i] == '(') {
            ++i;
            Term t;
            t.list = true;
            for (;;) {
                skip();
                if (i >= s.size()) throw std::runtime_error("eval_smt: unclosed list");
                if (s[i] == ')') {
                    ++i;
                    return t;
                }
                t.items.push_back(read());
            }
        }
        Term t;
        if (s[i] == '|') {
            auto end = s.find('|', i + 1);
            t.atom = s.substr(i + 1, end - i - 1);
            i = end + 1;
            return t;
        }
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' && s[i] != ')')
            t.atom += s[i++];
        return t;
    }
};

long long eval(const Term& t, const std::map<std::string, long long>& env) {
    if (!t.list) {
        if (t.atom == "true") return 1;
        if (t.atom == "false") return 0;
        if (std::isdigit(static_cast<unsigned char>(t.atom[0]))) return std::stoll(t.atom);
        auto it = env.find(t.atom);
        if (it == env.end()) throw std::runtime_error("eval_smt: unbound " + t.atom);
        return it->second;
    }
    const std::string& op = t.items.at(0).atom;
    std::vector<long long> a;
    for (std::size_t k = 1; k < t.items.size(); ++k) a.push_back(eval(t.items[k], env));
    if (op == "and") return std::all_of(a.begin(), a.end(), [](long long x) { return x != 0; });
    if (op == "or") return std::any_of(a.begin(), a.end(), [](long long x) { return x != 0; });
    if (op == "not") return !a.at(0);
    if (op == "=>") return !a.at(0) || a.at(1);
    if (op == "=") return a.at(0) == a.at(1);
    if (op == "<=") return a.at(0) <= a.at(1);
    if (op == ">=") return a.at(0) >= a.at(1);
    if (op == "<") return a.at(0) < a.at(1);
    if (op == ">") return a.at(0) > a.at(1);
    if (op == "+") {
        long long v = 0;
        for (auto x : a) v += x;
        return v;
    }
    if (op == "-") {
        if (a.size() == 1) return -a[0];
        long long v = a[0];
        for (std::size_t k = 1; k < a.size(); ++k) v -= a[k];
        return v;
    }
    if (op == "*") {
        long long v = 1;
        for (auto x : a) v *= x;
        return v;
    }
    throw std::runtime_error("eval_smt: unknown operator " + op);
}

}  // namespace

long long eval_smt(const std::string& term, const std::map<std::string, long long>& env) {
    TermReader r{term};
    return eval(r.read(), env);
}

std::optional<std::set<Vec>> reconstruct(const PetriNet& original, const ReductionSystem& system,
                                         const PetriNet& reduced, const std::set<Vec>& reduced_space,
                                         std::size_t cap) {
    auto var = [](const std::string& p) { return smt::symbol("orig!" + p); };
    std::set<Vec> out;
    smt::SolverSession s(solver());
    for (const auto& p : original.place_names()) {
        s.declare_int("orig!" + p);
        s.assert_formula("(>= " + var(p) + " 0)");
    }
    for (const auto& m2 : reduced_space) {
        std::map<std::string, Tokens> fixed;
        for (PlaceId p = 0; p < reduced.place_count(); ++p) fixed[reduced.place_name(p)] = m2[p];
        auto side = [&](const LinearExpr& e) {
            std::string t = "(+ " + std::to_string(e.constant());
            for (const auto& term : e.terms()) {
                auto it = fixed.find(term.place);
                std::string v = it != fixed.end() ? std::to_string(it->second) : var(term.place);
                std::string k = term.coefficient < 0 ? "(- " + std::to_string(-term.coefficient) + ")"
                                                     : std::to_string(term.coefficient);
                t += " (* " + k + " " + v + ")";
            }
            return t + ")";
        };
        s.push();
        for (const auto& eq : system.equations) s.assert_formula("(= " + side(eq.lhs) + " " + side(eq.rhs) + ")");
        for (const auto& [name, value] : fixed)
            if (original.find_place(name)) s.assert_formula("(= " + var(name) + " " + std::to_string(value) + ")");
        for (;;) {
            auto r = s.check();
            if (r.unknown()) throw std::runtime_error("reconstruct: solver gave up");
            if (r.unsat()) break;
            Vec m1(original.place_count(), 0);
            std::string block = "(not (and";
            for (PlaceId p = 0; p < original.place_count(); ++p) {
                m1[p] = r.value("orig!" + original.place_name(p));
                block += " (= " + var(original.place_name(p)) + " " + std::to_string(m1[p]) + ")";
            }
            out.insert(m1);
            if (out.size() > cap) return std::nullopt;
            s.assert_formula(block + " true))");
        }
        s.pop();
    }
    return out;
}

std::optional<Verdict> run_method(Technique technique, const PetriNet& net, const Query& query,
                                  std::chrono::milliseconds budget, MethodOptions options,
                                  const ReducedInput* reduction) {
    std::stop_source source;
    std::mutex m;
    std::condition_variable cv;
    bool done = false;
    std::optional<Verdict> result;
    std::exception_ptr failure;
    {
        std::jthread worker([&] {
            try {
                CheckContext ctx{net, query, solver(), source.get_token(), options, reduction};
                result = checkers::run(technique, ctx);
            } catch (...) {
                failure = std::current_exception();
            }
            std::lock_guard lock(m);
            done = true;
            cv.notify_all();
        });
        std::unique_lock lock(m);
        if (!cv.wait_for(lock, budget, [&] { return done; })) source.request_stop();
    }
    if (failure) std::rethrow_exception(failure);
    return result;
}

int child_solver_processes() {
    int count = 0;
    const std::string self = std::to_string(::getpid());
    for (const auto& e : std::filesystem::directory_iterator("/proc")) {
        const std::string pid = e.path().filename().string();
        if (!std::all_of(pid.begin(), pid.end(), [](unsigned char c) { return std::isdigit(c); })) continue;
        std::ifstream stat(e.path() / "stat");
        std::string line;
        if (!std::getline(stat, line)) continue;
        // pid (comm) state ppid ...
        auto close = line.rfind(')');
        if (close == std::string::npos) continue;
        std::istringstream rest(line.substr(close + 2));
        std::string state, ppid;
        rest >> state >> ppid;
        (void)state;
        if (ppid == self) ++count;  // zombies included: an unreaped child is still an orphan here
    }
    return count;
}

}  // namespace pnreach::test
