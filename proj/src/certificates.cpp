#include "pnreach/certificates.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "pnreach/encodings.hpp"
#include "pnreach/error.hpp"
#include "pnreach/parsers.hpp"
#include "pnreach/reducer.hpp"
#include "pnreach/sexpr.hpp"

namespace pnreach {

namespace {

using enc::StepVars;

CertificateCheck pass() { return {true, {}, {}}; }
CertificateCheck fail(std::string reason, std::map<std::string, Tokens, std::less<>> model = {}) {
    return {false, std::move(reason), std::move(model)};
}

std::string not_term(const BoolExpr& f, const StepVars& v) { return enc::encode_bool(push_negations(!f), v); }

struct Obligation {
    std::string name;
    std::vector<std::string> assertions;
};

std::vector<Obligation> invariant_obligations(const PetriNet& net, const BoolExpr& r, const BoolExpr& goal) {
    const StepVars s0(0), s1(1);
    return {
        {"i", {enc::encode_initial(net, s0), not_term(r, s0)}},
        {"ii", {enc::encode_nonneg(net, s0), enc::encode_bool(r, s0), enc::encode_step(net, s0, s1), not_term(r, s1)}},
        {"iii", {enc::encode_nonneg(net, s0), enc::encode_bool(r, s0), enc::encode_bool(goal, s0)}},
    };
}

std::string script(const PetriNet& net, int steps, const std::vector<Obligation>& obligations) {
    std::ostringstream out;
    out << "(set-logic QF_LIA)\n";
    for (int k = 0; k <= steps; ++k)
        for (const auto& p : net.place_names()) out << "(declare-fun " << StepVars(k).var(p) << " () Int)\n";
    for (const auto& ob : obligations) {
        out << "; obligation " << ob.name << "\n(push 1)\n";
        for (const auto& a : ob.assertions) out << "(assert " << a << ")\n";
        out << "(check-sat)\n(pop 1)\n";
    }
    out << "(exit)\n";
    return out.str();
}

std::string to_text(const smt::SExpr& e) {
    if (e.is_list) {
        std::string out = "(";
        for (std::size_t i = 0; i < e.list.size(); ++i) out += (i ? " " : "") + to_text(e.list[i]);
        return out + ")";
    }
    const std::string& a = e.atom;
    bool numeral = !a.empty() && std::all_of(a.begin(), a.end(), [](unsigned char c) { return std::isdigit(c); });
    if (numeral || a.starts_with(':')) return a;
    return smt::symbol(a);
}

std::string file_stem(const std::string& id) {
    std::string out;
    for (unsigned char c : id) out += std::isalnum(c) || c == '-' || c == '_' || c == '.' ? static_cast<char>(c) : '_';
    return out.empty() ? "query" : out;
}

/// Name-keyed assignment: reduced places from `reduced`, removed original places from `witness`.
std::map<std::string, Tokens, std::less<>> combined_assignment(const PetriNet& original, const Marking& witness,
                                                               const PetriNet& reduced, const Marking& final_marking) {
    std::map<std::string, Tokens, std::less<>> values;
    for (PlaceId p = 0; p < original.place_count(); ++p) values[original.place_name(p)] = witness[p];
    for (PlaceId p = 0; p < reduced.place_count(); ++p) values[reduced.place_name(p)] = final_marking[p];
    return values;
}

CertificateCheck replay_reduced(const ReducedInput& reduction, const std::vector<TransitionId>& transitions,
                                Marking* final_marking) {
    Marking m = reduction.net.initial_marking();
    for (std::size_t i = 0; i < transitions.size(); ++i) {
        if (!is_enabled(reduction.net, m, transitions[i])) return fail("step " + std::to_string(i));
        m = fire(reduction.net, m, transitions[i]);
    }
    *final_marking = std::move(m);
    return pass();
}

}  // namespace

// ---------------------------------------------------------------------------

std::string invariant_script(const PetriNet& net, const BoolExpr& invariant, const BoolExpr& goal) {
    return script(net, 1, invariant_obligations(net, invariant, goal));
}

std::string k_induction_script(const PetriNet& net, const BoolExpr& goal, int k) {
    std::vector<Obligation> obligations;
    for (int j = 0; j <= k; ++j) {
        Obligation ob{"base " + std::to_string(j), {enc::encode_initial(net, StepVars(0))}};
        for (int i = 0; i < j; ++i) ob.assertions.push_back(enc::encode_step(net, StepVars(i), StepVars(i + 1)));
        ob.assertions.push_back(enc::encode_bool(goal, StepVars(j)));
        obligations.push_back(std::move(ob));
    }
    Obligation step{"step", {enc::encode_nonneg(net, StepVars(0))}};
    for (int i = 0; i <= k; ++i) {
        step.assertions.push_back(not_term(goal, StepVars(i)));
        step.assertions.push_back(enc::encode_step(net, StepVars(i), StepVars(i + 1)));
    }
    step.assertions.push_back(enc::encode_bool(goal, StepVars(k + 1)));
    obligations.push_back(std::move(step));
    return script(net, k + 1, obligations);
}

CertificateCheck check_invariant_certificate(const PetriNet& net, const Query& query, const BoolExpr& invariant,
                                             const smt::SolverConfig& config) {
    for (const auto& p : referenced_places(invariant))
        if (!net.find_place(p)) return fail("place '" + p + "' is not in the net");
    const Goal goal = normalize(query);
    smt::SolverSession s(config);
    enc::declare_places(s, net, StepVars(0));
    enc::declare_places(s, net, StepVars(1));
    for (const auto& ob : invariant_obligations(net, invariant, goal.formula)) {
        s.push();
        for (const auto& a : ob.assertions) s.assert_formula(a);
        auto r = s.check(true);
        if (r.unknown()) return fail("unknown");
        if (r.sat()) return fail(ob.name, r.model);
        s.pop();
    }
    return pass();
}

CertificateCheck check_trace_certificate(const PetriNet& net, const Query& query,
                                         const std::vector<TransitionId>& transitions) {
    Marking m = net.initial_marking();
    for (std::size_t i = 0; i < transitions.size(); ++i) {
        if (transitions[i] >= net.transition_count() || !is_enabled(net, m, transitions[i]))
            return fail("step " + std::to_string(i));
        m = fire(net, m, transitions[i]);
    }
    if (!evaluate(net, m, normalize(query).formula)) return fail("final evaluation");
    return pass();
}

CertificateCheck check_obligation_script(const std::string& text, const smt::SolverConfig& config, int* checks) {
    std::vector<smt::SExpr> commands;
    try {
        commands = smt::parse_sexprs(text);
    } catch (const Error& e) {
        return fail(std::string("malformed script: ") + e.what());
    }
    smt::SolverSession s(config);
    int count = 0;
    for (const auto& c : commands) {
        if (!c.is_list || c.list.empty() || c.list.front().is_list) return fail("malformed command");
        const std::string& head = c.list.front().atom;
        if (head == "set-logic" || head == "set-option" || head == "exit" || head == "set-info") continue;
        if (head == "declare-fun" || head == "declare-const") {
            const smt::SExpr& sort = c.list.back();
            if (c.list.size() < 3 || sort.is_list) return fail("malformed declaration");
            if (sort.atom == "Bool")
                s.declare_bool(c.list[1].atom);
            else
                s.declare_int(c.list[1].atom);
        } else if (head == "assert" && c.list.size() == 2) {
            s.assert_formula(to_text(c.list[1]));
        } else if (head == "push" || head == "pop") {
            long long n = c.list.size() > 1 ? smt::as_integer(c.list[1]).value_or(1) : 1;
            for (long long i = 0; i < n; ++i) head == "push" ? s.push() : s.pop();
        } else if (head == "check-sat") {
            ++count;
            auto r = s.check(true);
            if (r.unknown()) return fail("unknown");
            if (r.sat()) return fail("check " + std::to_string(count), r.model);
        } else {
            return fail("unsupported command '" + head + "'");
        }
    }
    if (checks) *checks = count;
    if (count == 0) return fail("no check-sat");
    return pass();
}

CertificateCheck check_verdict(const PetriNet& net, const Query& query, const Verdict& verdict,
                               const ReducedInput* reduction, const smt::SolverConfig& config) {
    if (verdict.certificate) {
        const Certificate& c = *verdict.certificate;
        if (c.kind == Certificate::Kind::KInductionObligation) return check_obligation_script(c.obligation, config);
        return check_invariant_certificate(net, query, c.invariant, config);
    }
    const BoolExpr goal = normalize(query).formula;
    if (verdict.trace && !verdict.trace_on_reduced_net) {
        return check_trace_certificate(net, query, verdict.trace->transitions);
    }
    if (verdict.witness) {
        if (!evaluate(net, *verdict.witness, goal)) return fail("witness misses the goal");
        if (!reduction) return pass();
        Marking final_marking = reduction->net.initial_marking();
        if (verdict.trace) {
            auto r = replay_reduced(*reduction, verdict.trace->transitions, &final_marking);
            if (!r) return r;
        }
        auto values = combined_assignment(net, *verdict.witness, reduction->net, final_marking);
        for (const auto& p : reduction->net.place_names())
            if (auto q = net.find_place(p); q && (*verdict.witness)[*q] != values[p])
                return fail("witness disagrees with the reduced marking on '" + p + "'");
        for (const auto& eq : reduction->system.equations)
            if (!evaluate(values, BoolExpr::atom(eq.lhs, Comparison::Eq, eq.rhs)))
                return fail("witness violates the reduction equations");
        return pass();
    }
    return pass();
}

// ---------------------------------------------------------------------------

std::string trace_text(const PetriNet& net, const std::string& query_id, const Trace& trace) {
    std::string out = "# net: " + net.name() + "\n# query: " + query_id + "\n";
    for (auto t : trace.transitions) out += net.transition_name(t) + "\n";
    return out;
}

std::vector<TransitionId> parse_trace_text(const PetriNet& net, const std::string& text) {
    std::vector<TransitionId> out;
    std::istringstream in(text);
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
        auto first = line.find_first_not_of(" \t\r");
        auto last = line.find_last_not_of(" \t\r");
        std::string name = first == std::string::npos ? "" : line.substr(first, last - first + 1);
        if (name.empty() || name.front() == '#') continue;
        auto t = net.find_transition(name);
        if (!t) throw ParseError("line " + std::to_string(n), "unknown transition '" + name + "'");
        out.push_back(*t);
    }
    return out;
}

std::optional<std::filesystem::path> export_certificate(const PetriNet& net, const Query& query,
                                                        const Verdict& verdict,
                                                        const std::filesystem::path& directory,
                                                        const ReducedInput* reduction) {
    std::string body;
    std::filesystem::path path;
    if (verdict.certificate) {
        const Certificate& c = *verdict.certificate;
        body = c.kind == Certificate::Kind::KInductionObligation ? c.obligation
                                                                 : invariant_script(net, c.invariant, normalize(query).formula);
        path = directory / (file_stem(query.id) + ".smt2");
    } else if (verdict.trace) {
        if (verdict.trace_on_reduced_net) {
            if (!reduction) throw UsageError("exporting a reduced-net trace needs the reduction");
            body = "# reduced\n" + trace_text(reduction->net, query.id, *verdict.trace);
        } else {
            body = trace_text(net, query.id, *verdict.trace);
        }
        path = directory / (file_stem(query.id) + ".trace");
    } else {
        return std::nullopt;
    }
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    std::ofstream out(path, std::ios::binary);
    out << body;
    out.close();
    if (!out) throw Error("cannot write " + path.string());
    return path;
}

CertificateCheck check_exported(const PetriNet& net, const Query& query, const std::filesystem::path& path,
                                const smt::SolverConfig& config, const ReducedInput* reduction) {
    std::string text = read_file(path);
    if (path.extension() == ".smt2") return check_obligation_script(text, config);
    if (!text.starts_with("# reduced\n")) return check_trace_certificate(net, query, parse_trace_text(net, text));

    if (!reduction) return fail("reduced-net trace without its reduction");
    Marking final_marking;
    if (auto r = replay_reduced(*reduction, parse_trace_text(reduction->net, text), &final_marking); !r) return r;
    // Some original marking related to the final reduced marking must satisfy the goal.
    const StepVars v(0);
    smt::SolverSession s(config);
    enc::declare_places(s, reduction->net, v);
    enc::declare_places(s, reduction->system.removed_places(), v);
    s.assert_formula(enc::encode_marking(reduction->net, final_marking, v));
    s.assert_formula(enc::encode_bool(transform_query(normalize(query).formula, reduction->system), v));
    auto r = s.check(false);
    if (r.unknown()) return fail("unknown");
    if (r.unsat()) return fail("final evaluation");
    return pass();
}

}  // namespace pnreach
