#pragma once

#include <sys/types.h>

#include <chrono>
#include <functional>
#include <map>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "pnreach/error.hpp"
#include "pnreach/model.hpp"

namespace pnreach::smt {

/// Raised when a blocking solver exchange is abandoned because the owning
/// task was asked to stop.
class Cancelled : public Error {
public:
    Cancelled() : Error("cancelled") {}
};

struct SolverConfig {
    std::string executable = "z3";
    std::vector<std::string> arguments = {"-in"};
    /// Wall-clock budget per check-sat; zero means unlimited.
    std::chrono::milliseconds query_budget{0};
    /// Receives every line sent to and received from the solver when set.
    std::function<void(std::string_view)> debug_sink;
    /// Rejects non-linear terms in assert_formula.
    bool lint_terms = false;

    /// Executable from $PNREACH_SOLVER when set, otherwise `z3` from PATH.
    /// Default arguments are chosen from the executable's base name.
    static SolverConfig from_environment();
    static std::vector<std::string> default_arguments(std::string_view executable);
};

struct SmtResult {
    enum class Status { Sat, Unsat, Unknown };

    Status status = Status::Unknown;
    /// Integer-valued model on SAT (Booleans map to 0/1), keyed by unquoted symbol.
    std::map<std::string, Tokens, std::less<>> model;
    /// For UNKNOWN: "timeout", "cancelled", "crash" or the solver's reason.
    std::string reason;

    bool sat() const noexcept { return status == Status::Sat; }
    bool unsat() const noexcept { return status == Status::Unsat; }
    bool unknown() const noexcept { return status == Status::Unknown; }
    Tokens value(std::string_view name) const;
};

/// Conversation with one child solver process over its standard streams,
/// in QF_LIA with incremental push/pop. Confined to one thread at a time.
class SolverSession {
public:
    explicit SolverSession(SolverConfig config, std::stop_token stop = {});
    ~SolverSession();
    SolverSession(const SolverSession&) = delete;
    SolverSession& operator=(const SolverSession&) = delete;

    void declare_int(std::string_view name);
    void declare_bool(std::string_view name);
    void assert_formula(std::string_view term);
    void push();
    /// Throws UsageError at depth 0.
    void pop();

    /// On SAT the model of every declared symbol is fetched unless `with_model` is false.
    SmtResult check(bool with_model = true);

    bool alive() const noexcept { return alive_; }
    std::size_t depth() const noexcept { return frames_.size() - 1; }
    /// Assertions currently in scope, oldest first.
    std::vector<std::string> assertions() const;
    std::size_t assertion_count() const;
    bool is_declared(std::string_view name) const;
    pid_t pid() const noexcept { return pid_; }

    /// Kills the child process; the session is dead afterwards.
    void terminate();

    /// Number of solver processes currently owned by sessions in this process.
    static int live_processes();

private:
    struct Frame {
        std::vector<std::string> declarations;
        std::vector<std::string> assertions;
    };

    enum class ReadStatus { Ok, Timeout, Cancelled, Eof };
    using Deadline = std::chrono::steady_clock::time_point;

    void send(std::string_view command);
    void drain();
    ReadStatus read_line(std::string& line, Deadline deadline);
    /// One complete reply: an atom line or a balanced s-expression spanning lines.
    ReadStatus read_response(std::string& reply, Deadline deadline);
    void require_alive() const;
    void declare(std::string_view name, std::string_view sort);
    [[noreturn]] void fail(const std::string& why);
    void log(std::string_view prefix, std::string_view text) const;

    SolverConfig config_;
    std::stop_token stop_;
    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    bool alive_ = false;
    std::string dead_reason_;
    std::string buffer_;
    std::size_t pending_ = 0;
    std::vector<Frame> frames_{1};
    int id_ = 0;
};

/// SMT-LIB2 symbol for `name`, quoted with bars when it is not a simple symbol.
std::string symbol(std::string_view name);

/// True when no multiplication in `term` has more than one non-constant factor.
bool is_linear(std::string_view term);

}  // namespace pnreach::smt
