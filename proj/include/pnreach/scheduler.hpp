#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "pnreach/checkers.hpp"
#include "pnreach/error.hpp"

namespace pnreach {

struct Wave {
    std::vector<Technique> methods;
    /// Zero: the wave may use whatever remains of the property timeout.
    std::chrono::milliseconds budget{0};
};

struct JobPlan {
    std::vector<Wave> waves;
    std::chrono::milliseconds property_timeout{300'000};
    std::optional<std::chrono::steady_clock::time_point> global_deadline;
};

/// Everything at once, in one wave.
JobPlan single_wave_plan(std::vector<Technique> methods, std::chrono::milliseconds property_timeout);
/// Wave 1: RANDOM_WALK and STATE_EQUATION for up to 120 s; wave 2: the remaining methods.
JobPlan mcc_plan(std::chrono::milliseconds property_timeout);

/// Two methods reported opposite answers for the same query.
class ConflictingVerdicts : public Error {
public:
    using Error::Error;
};

/// STATE_EQUATION never finds the goal reachable; BMC and RANDOM_WALK never find it unreachable.
bool respects_semi_decision(const Verdict& v);

using MethodRunner = std::function<std::optional<Verdict>(Technique, const CheckContext&)>;

struct PortfolioResult {
    std::string query_id;
    /// nullopt is UNKNOWN.
    std::optional<Verdict> verdict;
    std::chrono::duration<double> elapsed{0};
};

struct PortfolioOptions {
    smt::SolverConfig solver;
    MethodOptions methods;
    const ReducedInput* reduction = nullptr;
    /// Coordinators running at the same time.
    std::size_t parallel_queries = 1;
    /// Called once per query as soon as it is decided, in completion order.
    std::function<void(const PortfolioResult&)> on_result;
    /// Diagnostics (crashing methods, discarded verdicts).
    std::function<void(const std::string&)> log;
    /// Replaces checkers::run, mainly for tests.
    MethodRunner runner;
};

/// Runs the plan for one query. Cancelled early when `stop` is requested.
PortfolioResult run_query(const PetriNet& net, const Query& query, const JobPlan& plan,
                          const PortfolioOptions& options, std::stop_token stop = {});

/// Runs every query, returning results in completion order.
/// Throws ConflictingVerdicts when two methods disagree.
std::vector<PortfolioResult> run_portfolio(const PetriNet& net, const std::vector<Query>& queries,
                                           const JobPlan& plan, const PortfolioOptions& options);

}  // namespace pnreach
