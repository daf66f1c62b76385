#include "pnreach/smt.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <mutex>

#include "pnreach/sexpr.hpp"

extern char** environ;

namespace pnreach::smt {

namespace {

std::atomic<int> g_live_processes{0};
std::atomic<int> g_session_ids{0};

void ignore_sigpipe() {
    static std::once_flag once;
    std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

bool is_simple_symbol(std::string_view name) {
    if (name.empty()) return false;
    if (std::isdigit(static_cast<unsigned char>(name.front()))) return false;
    static constexpr std::string_view extra = "~!@$%^&*_-+=<>.?/";
    for (char c : name)
        if (!std::isalnum(static_cast<unsigned char>(c)) && extra.find(c) == std::string_view::npos) return false;
    static constexpr std::string_view reserved[] = {"true", "false", "and", "or", "not", "let", "ite",
                                                    "assert", "par", "_", "!", "as", "exists", "forall"};
    for (auto r : reserved)
        if (name == r) return false;
    return name.front() != '@';
}

bool lint(const SExpr& e) {
    if (!e.is_list) return true;
    if (!e.list.empty() && e.list.front().is_atom("*")) {
        int variables = 0;
        for (std::size_t i = 1; i < e.list.size(); ++i)
            if (!as_integer(e.list[i])) ++variables;
        if (variables > 1) return false;
    }
    return std::all_of(e.list.begin(), e.list.end(), [](const SExpr& c) { return lint(c); });
}

}  // namespace

std::string symbol(std::string_view name) {
    if (is_simple_symbol(name)) return std::string(name);
    if (name.find('|') != std::string_view::npos || name.find('\\') != std::string_view::npos)
        throw Error("identifier cannot be represented as an SMT-LIB symbol: " + std::string(name));
    return "|" + std::string(name) + "|";
}

bool is_linear(std::string_view term) {
    try {
        return lint(parse_sexpr(term));
    } catch (const Error&) {
        return false;
    }
}

SolverConfig SolverConfig::from_environment() {
    SolverConfig config;
    if (const char* env = std::getenv("PNREACH_SOLVER"); env && *env) {
        config.executable = env;
    } else {
#ifdef PNREACH_DEFAULT_SOLVER
        config.executable = PNREACH_DEFAULT_SOLVER;
#else
        config.executable = "z3";
#endif
    }
    config.arguments = default_arguments(config.executable);
    return config;
}

std::vector<std::string> SolverConfig::default_arguments(std::string_view executable) {
    std::string base = std::filesystem::path(executable).filename().string();
    if (base.rfind("z3", 0) == 0) return {"-in"};
    if (base.rfind("cvc", 0) == 0) return {"--incremental", "--lang=smt2"};
    if (base.rfind("yices", 0) == 0) return {"--incremental"};
    return {};
}

Tokens SmtResult::value(std::string_view name) const {
    auto it = model.find(name);
    if (it == model.end()) throw SolverError("no model value for '" + std::string(name) + "'");
    return it->second;
}

// ---------------------------------------------------------------------------

SolverSession::SolverSession(SolverConfig config, std::stop_token stop)
    : config_(std::move(config)), stop_(std::move(stop)), id_(++g_session_ids) {
    ignore_sigpipe();
    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw SolverError(std::string("pipe: ") + std::strerror(errno));
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
        int err = errno;
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw SolverError(std::string("pipe: ") + std::strerror(err));
    }

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, "/dev/null", O_WRONLY, 0);

    std::vector<std::string> args;
    args.push_back(config_.executable);
    args.insert(args.end(), config_.arguments.begin(), config_.arguments.end());
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);

    int rc = ::posix_spawnp(&pid_, config_.executable.c_str(), &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    if (rc != 0) {
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        pid_ = -1;
        throw SolverError("cannot start solver '" + config_.executable + "': " + std::strerror(rc));
    }
    ++g_live_processes;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    alive_ = true;

    send("(set-option :print-success true)");
    send("(set-option :produce-models true)");
    send("(set-logic QF_LIA)");
    drain();
}

SolverSession::~SolverSession() { terminate(); }

void SolverSession::terminate() {
    if (pid_ > 0) {
        ::kill(pid_, SIGKILL);
        int status = 0;
        while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
        }
        pid_ = -1;
        --g_live_processes;
    }
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    to_child_ = from_child_ = -1;
    if (alive_) {
        alive_ = false;
        if (dead_reason_.empty()) dead_reason_ = "terminated";
    }
}

int SolverSession::live_processes() { return g_live_processes.load(); }

void SolverSession::fail(const std::string& why) {
    dead_reason_ = why;
    terminate();
    throw SolverError("solver session failed: " + why);
}

void SolverSession::require_alive() const {
    if (!alive_) throw SolverError("solver session is dead (" + dead_reason_ + ")");
}

void SolverSession::log(std::string_view prefix, std::string_view text) const {
    if (!config_.debug_sink) return;
    std::string line = "[smt " + std::to_string(id_) + "] ";
    line += prefix;
    line += text;
    config_.debug_sink(line);
}

void SolverSession::send(std::string_view command) {
    require_alive();
    log("> ", command);
    std::string data(command);
    data += '\n';
    std::size_t written = 0;
    while (written < data.size()) {
        ssize_t n = ::write(to_child_, data.data() + written, data.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail(std::string("write: ") + std::strerror(errno));
        }
        written += static_cast<std::size_t>(n);
    }
    if (command.rfind("(check-sat", 0) != 0 && command.rfind("(get-", 0) != 0) ++pending_;
    // Keep the reply pipe from filling up while we are still writing.
    if (pending_ >= 256) drain();
}

SolverSession::ReadStatus SolverSession::read_line(std::string& line, Deadline deadline) {
    for (;;) {
        auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return ReadStatus::Ok;
        }
        if (stop_.stop_requested()) return ReadStatus::Cancelled;
        auto now = std::chrono::steady_clock::now();
        if (now >= deadline) return ReadStatus::Timeout;
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        int slice = static_cast<int>(std::min<long long>(20, std::max<long long>(1, remaining)));
        pollfd pfd{from_child_, POLLIN, 0};
        int rc = ::poll(&pfd, 1, slice);
        if (rc < 0) {
            if (errno == EINTR) continue;
            return ReadStatus::Eof;
        }
        if (rc == 0) continue;
        char chunk[4096];
        ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            return ReadStatus::Eof;
        }
        if (n == 0) return ReadStatus::Eof;
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

SolverSession::ReadStatus SolverSession::read_response(std::string& reply, Deadline deadline) {
    reply.clear();
    std::string line;
    for (;;) {
        ReadStatus st = read_line(line, deadline);
        if (st != ReadStatus::Ok) return st;
        if (reply.empty()) {
            auto first = line.find_first_not_of(" \t");
            if (first == std::string::npos || line[first] == ';') continue;
        }
        if (!reply.empty()) reply += '\n';
        reply += line;
        if (paren_balance(reply) <= 0) {
            log("< ", reply);
            return ReadStatus::Ok;
        }
    }
}

void SolverSession::drain() {
    std::string reply;
    while (pending_ > 0) {
        ReadStatus st = read_response(reply, Deadline::max());
        if (st == ReadStatus::Cancelled) {
            dead_reason_ = "cancelled";
            terminate();
            throw Cancelled();
        }
        if (st != ReadStatus::Ok) fail("solver exited unexpectedly");
        --pending_;
        if (reply != "success") fail("unexpected reply '" + reply + "'");
    }
}

void SolverSession::declare(std::string_view name, std::string_view sort) {
    require_alive();
    if (is_declared(name)) throw UsageError("symbol '" + std::string(name) + "' already declared");
    send("(declare-fun " + symbol(name) + " () " + std::string(sort) + ")");
    frames_.back().declarations.emplace_back(name);
}

void SolverSession::declare_int(std::string_view name) { declare(name, "Int"); }
void SolverSession::declare_bool(std::string_view name) { declare(name, "Bool"); }

void SolverSession::assert_formula(std::string_view term) {
    require_alive();
    if (config_.lint_terms && !is_linear(term))
        throw UsageError("non-linear or malformed term: " + std::string(term));
    send("(assert " + std::string(term) + ")");
    frames_.back().assertions.emplace_back(term);
}

void SolverSession::push() {
    require_alive();
    send("(push 1)");
    frames_.emplace_back();
}

void SolverSession::pop() {
    require_alive();
    if (frames_.size() <= 1) throw UsageError("pop at assertion depth 0");
    send("(pop 1)");
    frames_.pop_back();
}

bool SolverSession::is_declared(std::string_view name) const {
    for (const auto& f : frames_)
        for (const auto& d : f.declarations)
            if (d == name) return true;
    return false;
}

std::vector<std::string> SolverSession::assertions() const {
    std::vector<std::string> out;
    for (const auto& f : frames_) out.insert(out.end(), f.assertions.begin(), f.assertions.end());
    return out;
}

std::size_t SolverSession::assertion_count() const {
    std::size_t n = 0;
    for (const auto& f : frames_) n += f.assertions.size();
    return n;
}

SmtResult SolverSession::check(bool with_model) {
    require_alive();
    SmtResult result;
    try {
        drain();
    } catch (const Cancelled&) {
        result.reason = "cancelled";
        return result;
    } catch (const SolverError&) {
        result.reason = "crash";
        return result;
    }

    auto deadline = config_.query_budget.count() > 0 ? std::chrono::steady_clock::now() + config_.query_budget
                                                     : Deadline::max();
    send("(check-sat)");
    std::string reply;
    ReadStatus st = read_response(reply, deadline);
    if (st != ReadStatus::Ok) {
        result.reason = st == ReadStatus::Timeout ? "timeout" : st == ReadStatus::Cancelled ? "cancelled" : "crash";
        dead_reason_ = result.reason;
        terminate();
        return result;
    }
    if (reply == "unsat") {
        result.status = SmtResult::Status::Unsat;
        return result;
    }
    if (reply == "unknown") {
        result.reason = "solver returned unknown";
        return result;
    }
    if (reply != "sat") {
        dead_reason_ = "unexpected reply '" + reply + "'";
        terminate();
        result.reason = "crash";
        return result;
    }
    result.status = SmtResult::Status::Sat;
    if (!with_model) return result;

    bool any = false;
    for (const auto& f : frames_) any = any || !f.declarations.empty();
    if (!any) return result;

    send("(get-model)");
    st = read_response(reply, Deadline::max());
    if (st != ReadStatus::Ok) {
        dead_reason_ = st == ReadStatus::Cancelled ? "cancelled" : "crash";
        terminate();
        result.status = SmtResult::Status::Unknown;
        result.reason = dead_reason_;
        return result;
    }
    try {
        SExpr model = parse_sexpr(reply);
        if (!model.is_list) throw Error("model is not a list");
        auto entries = model.list;
        if (!entries.empty() && entries.front().is_atom("model")) entries.erase(entries.begin());
        for (const auto& def : entries) {
            if (!def.is_list || def.list.size() != 5 || !def.list[0].is_atom("define-fun")) continue;
            const SExpr& value = def.list[4];
            const std::string& name = def.list[1].atom;
            if (value.is_atom("true"))
                result.model[name] = 1;
            else if (value.is_atom("false"))
                result.model[name] = 0;
            else if (auto v = as_integer(value))
                result.model[name] = *v;
        }
    } catch (const Error& err) {
        fail(std::string("cannot parse model: ") + err.what());
    }
    // Solvers may omit symbols the assertions do not constrain; any value completes the model.
    for (const auto& f : frames_)
        for (const auto& d : f.declarations) result.model.try_emplace(d, 0);
    return result;
}

}  // namespace pnreach::smt
