#include "pnreach/scheduler.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <thread>

namespace pnreach {

using Clock = std::chrono::steady_clock;

JobPlan single_wave_plan(std::vector<Technique> methods, std::chrono::milliseconds property_timeout) {
    JobPlan plan;
    plan.waves.push_back({std::move(methods), std::chrono::milliseconds{0}});
    plan.property_timeout = property_timeout;
    return plan;
}

JobPlan mcc_plan(std::chrono::milliseconds property_timeout) {
    JobPlan plan;
    plan.waves.push_back({{Technique::RandomWalk, Technique::StateEquation}, std::chrono::seconds{120}});
    plan.waves.push_back({{Technique::Bmc, Technique::KInduction, Technique::Pdr, Technique::Induction, Technique::Cp,
                           Technique::Enumeration},
                          std::chrono::milliseconds{0}});
    plan.property_timeout = property_timeout;
    return plan;
}

bool respects_semi_decision(const Verdict& v) {
    switch (v.technique) {
        case Technique::StateEquation: return !v.goal_reachable;
        case Technique::Bmc:
        case Technique::RandomWalk: return v.goal_reachable;
        default: return true;
    }
}

namespace {

struct Finished {
    Technique technique;
    std::optional<Verdict> verdict;
};

/// Results posted by method threads; one consumer.
class Channel {
public:
    void post(Finished f) {
        {
            std::lock_guard lock(mutex_);
            items_.push_back(std::move(f));
        }
        cv_.notify_all();
    }

    /// Waits until `done` holds for the posted items, the deadline passes or `stop` fires.
    template <typename Done>
    void wait(Clock::time_point deadline, const std::stop_token& stop, Done done) {
        std::unique_lock lock(mutex_);
        while (!done(items_) && !stop.stop_requested()) {
            auto slice = std::min(deadline, Clock::now() + std::chrono::milliseconds(20));
            cv_.wait_until(lock, slice);
            if (Clock::now() >= deadline) break;
        }
    }

    std::vector<Finished> take() {
        std::lock_guard lock(mutex_);
        return std::move(items_);
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::vector<Finished> items_;
};

void note(const PortfolioOptions& options, const std::string& text) {
    if (options.log) options.log(text);
}

std::optional<Verdict> run_wave(const PetriNet& net, const Query& query, const Wave& wave,
                                const PortfolioOptions& options, Clock::time_point deadline,
                                const std::stop_token& outer) {
    if (wave.methods.empty() || Clock::now() >= deadline) return std::nullopt;
    Channel channel;
    std::stop_source stop;
    std::stop_callback forward(outer, [&] { stop.request_stop(); });
    const auto runner = options.runner ? options.runner : MethodRunner(checkers::run);

    std::vector<std::jthread> threads;
    for (Technique t : wave.methods) {
        threads.emplace_back([&, t] {
            std::optional<Verdict> v;
            try {
                CheckContext ctx{net, query, options.solver, stop.get_token(), options.methods, options.reduction};
                v = runner(t, ctx);
            } catch (const std::exception& e) {
                note(options, std::string(label(t)) + " failed on " + query.id + ": " + e.what());
            }
            if (v && !respects_semi_decision(*v)) {
                note(options, std::string(label(t)) + " broke its semi-decision contract on " + query.id);
                v.reset();
            }
            channel.post({t, std::move(v)});
        });
    }

    const std::size_t n = wave.methods.size();
    channel.wait(deadline, outer, [n](const std::vector<Finished>& items) {
        return items.size() == n || std::any_of(items.begin(), items.end(), [](const Finished& f) { return f.verdict; });
    });
    stop.request_stop();
    threads.clear();  // joins

    std::optional<Verdict> winner;
    for (auto& f : channel.take()) {
        if (!f.verdict) continue;
        if (!winner) {
            winner = std::move(f.verdict);
        } else if (winner->answer != f.verdict->answer) {
            throw ConflictingVerdicts("conflicting verdicts on " + query.id + ": " + std::string(label(winner->technique)) +
                                      " and " + std::string(label(f.technique)));
        }
    }
    return winner;
}

}  // namespace

PortfolioResult run_query(const PetriNet& net, const Query& query, const JobPlan& plan,
                          const PortfolioOptions& options, std::stop_token stop) {
    const auto started = Clock::now();
    PortfolioResult result{query.id, std::nullopt, {}};
    auto deadline = started + plan.property_timeout;
    if (plan.global_deadline) deadline = std::min(deadline, *plan.global_deadline);

    for (const auto& wave : plan.waves) {
        if (stop.stop_requested() || Clock::now() >= deadline) break;
        auto wave_deadline = deadline;
        if (wave.budget.count() > 0) wave_deadline = std::min(wave_deadline, Clock::now() + wave.budget);
        result.verdict = run_wave(net, query, wave, options, wave_deadline, stop);
        if (result.verdict) break;
    }
    result.elapsed = Clock::now() - started;
    return result;
}

std::vector<PortfolioResult> run_portfolio(const PetriNet& net, const std::vector<Query>& queries,
                                           const JobPlan& plan, const PortfolioOptions& options) {
    std::vector<PortfolioResult> results;
    std::mutex mutex;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::stop_source abort;

    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= queries.size() || abort.stop_requested()) return;
            try {
                auto r = run_query(net, queries[i], plan, options, abort.get_token());
                std::lock_guard lock(mutex);
                results.push_back(r);
                if (options.on_result) options.on_result(results.back());
            } catch (...) {
                std::lock_guard lock(mutex);
                if (!failure) failure = std::current_exception();
                abort.request_stop();
                return;
            }
        }
    };

    const std::size_t workers = std::clamp<std::size_t>(options.parallel_queries, 1, std::max<std::size_t>(1, queries.size()));
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

}  // namespace pnreach
