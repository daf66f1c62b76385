#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pnreach/checkers.hpp"
#include "pnreach/model.hpp"
#include "pnreach/smt.hpp"
#include "pnreach/verdict.hpp"

namespace pnreach {

struct CertificateCheck {
    bool passed = false;
    /// Failing condition ("i", "ii", "iii", "unknown", "step 3", "final evaluation", ...).
    std::string reason;
    /// Offending assignment on SAT, when any.
    std::map<std::string, Tokens, std::less<>> model;

    explicit operator bool() const noexcept { return passed; }
};

/// Three UNSAT checks: (i) init /\ not R; (ii) nonneg /\ R@0 /\ step /\ not R@1;
/// (iii) nonneg /\ R /\ G, with G the normalized goal of the query.
CertificateCheck check_invariant_certificate(const PetriNet& net, const Query& query, const BoolExpr& invariant,
                                             const smt::SolverConfig& config);

/// Replays the firing sequence from m0 and evaluates the goal at its end.
CertificateCheck check_trace_certificate(const PetriNet& net, const Query& query,
                                         const std::vector<TransitionId>& transitions);

/// Runs a closed SMT-LIB2 script command by command; passes when every check-sat is unsat.
CertificateCheck check_obligation_script(const std::string& script, const smt::SolverConfig& config,
                                         int* checks = nullptr);

/// Checks whatever evidence a verdict carries: its certificate, its trace, or
/// its witness marking. Passes vacuously for verdicts without evidence.
/// Traces on a reduced net are replayed there and related to the witness through E.
CertificateCheck check_verdict(const PetriNet& net, const Query& query, const Verdict& verdict,
                               const ReducedInput* reduction, const smt::SolverConfig& config);

/// Standalone script with the three invariant obligations, one push/check-sat/pop block each.
std::string invariant_script(const PetriNet& net, const BoolExpr& invariant, const BoolExpr& goal);
/// Base cases 0..k and the inductive step of depth k, one block each.
std::string k_induction_script(const PetriNet& net, const BoolExpr& goal, int k);
/// "# net: N", "# query: Q", then one transition name per line.
std::string trace_text(const PetriNet& net, const std::string& query_id, const Trace& trace);
/// Transition names from a trace file, comments skipped. Throws ParseError on unknown names.
std::vector<TransitionId> parse_trace_text(const PetriNet& net, const std::string& text);

/// Writes the verdict's evidence into `directory` as `<query>.smt2` or
/// `<query>.trace`. Returns the written path, or nullopt when there is nothing
/// to export. Throws Error on I/O failure.
std::optional<std::filesystem::path> export_certificate(const PetriNet& net, const Query& query,
                                                        const Verdict& verdict,
                                                        const std::filesystem::path& directory,
                                                        const ReducedInput* reduction = nullptr);

/// Re-validates an artifact written by export_certificate. Reduced-net traces
/// need the reduction they were found on.
CertificateCheck check_exported(const PetriNet& net, const Query& query, const std::filesystem::path& path,
                                const smt::SolverConfig& config, const ReducedInput* reduction = nullptr);

}  // namespace pnreach
