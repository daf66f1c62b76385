#include "pnreach/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <mutex>
#include <sstream>

#include "pnreach/certificates.hpp"
#include "pnreach/parsers.hpp"
#include "pnreach/reducer.hpp"

namespace pnreach::cli {

namespace {

std::vector<std::string> split_list(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    for (const auto& a : args) {
        std::stringstream in(a);
        std::string item;
        while (std::getline(in, item, ','))
            if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

struct Settings {
    std::string net_path;
    std::string xml_path;
    bool deadlock = false;
    std::vector<std::string> quasi_liveness;
    std::vector<std::string> reachability;
    bool auto_reduce = false;
    std::string reduced_net;
    std::string save_reduced_net;
    std::vector<std::string> methods;
    int timeout = 300;
    int global_timeout = 0;
    bool mcc = false;
    bool debug = false;
    bool show_reduction_ratio = false;
    bool check_proof = false;
    std::string export_dir;
    bool export_proof = false;
    std::string solver;
    std::uint64_t seed = 0;
    bool colored = false;
    OutputOptions output;
};

std::vector<Query> build_queries(const Settings& s, const PetriNet& net, std::vector<PropertyError>& errors) {
    std::vector<Query> queries;
    if (s.deadlock) queries.push_back({"deadlock", Quantifier::EF, deadlock_formula(net)});
    for (const auto& t : split_list(s.quasi_liveness)) {
        auto id = net.find_transition(t);
        if (!id) throw UsageError("unknown transition '" + t + "'");
        queries.push_back({"quasi-liveness-" + t, Quantifier::EF, enabled_formula(net, *id)});
    }
    for (const auto& p : split_list(s.reachability)) {
        if (!net.find_place(p)) throw UsageError("unknown place '" + p + "'");
        queries.push_back({"reachability-" + p, Quantifier::EF,
                           BoolExpr::atom(LinearExpr::place(p), Comparison::Ge, LinearExpr(1))});
    }
    if (!s.xml_path.empty()) {
        auto set = parse_mcc_properties(read_file(s.xml_path), net);
        for (auto& q : set.queries) queries.push_back(std::move(q));
        errors = std::move(set.errors);
    }
    return queries;
}

std::vector<Technique> parse_methods(const std::vector<std::string>& names) {
    std::vector<Technique> out;
    for (const auto& name : split_list(names)) {
        auto t = parse_technique(name);
        if (!t) throw UsageError("unknown method '" + name + "'");
        if (std::find(out.begin(), out.end(), *t) == out.end()) out.push_back(*t);
    }
    return out;
}

std::optional<ReducedInput> load_reduction(const Settings& s, const PetriNet& net) {
    if (!s.reduced_net.empty()) {
        if (!std::filesystem::exists(s.reduced_net + ".eq"))
            throw UsageError("cannot open '" + s.reduced_net + ".eq'");
        ReducedInput r{load_net(s.reduced_net), {}};
        r.system = parse_reduction_system(read_file(s.reduced_net + ".eq"), net.place_names());
        auto declared = r.system.reduced_places, actual = r.net.place_names();
        std::sort(declared.begin(), declared.end());
        std::sort(actual.begin(), actual.end());
        if (declared != actual)
            throw ParseError(s.reduced_net + ".eq", "declared reduced places differ from the reduced net's places");
        return r;
    }
    if (s.auto_reduce || !s.save_reduced_net.empty() || s.show_reduction_ratio) {
        auto r = reduce(net);
        return ReducedInput{std::move(r.net), std::move(r.system)};
    }
    return std::nullopt;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    out.close();
    if (!out) throw Error("cannot write " + path);
}

}  // namespace

std::string format_reduction_ratio(double ratio) { return "REDUCTION RATIO " + fixed(ratio * 100.0, 2) + "%"; }

std::vector<std::string> format_result(const PortfolioResult& result, const OutputOptions& options,
                                       const PetriNet& net, const PetriNet* trace_net) {
    std::vector<std::string> lines;
    const auto& v = result.verdict;
    std::string head = "FORMULA " + result.query_id + " ";
    if (!v) {
        head += "CANNOT_COMPUTE";
    } else {
        head += v->answer ? "TRUE" : "FALSE";
        if (options.show_techniques) head += " TECHNIQUES " + std::string(label(v->technique));
    }
    lines.push_back(head);
    if (options.show_time) lines.push_back("TIME " + fixed(result.elapsed.count(), 3));
    if (options.show_model && v) {
        if (v->witness) lines.push_back("MODEL " + format_marking(net, *v->witness));
        if (v->trace) {
            const PetriNet& tn = v->trace_on_reduced_net && trace_net ? *trace_net : net;
            std::string line = "TRACE";
            for (auto t : v->trace->transitions) line += " " + tn.transition_name(t);
            lines.push_back(line);
        }
    }
    return lines;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Settings s;
    CLI::App app{"pnreach: reachability model checking for Petri nets"};
    app.add_option("net,-n,--net", s.net_path, "Input net (.pnml for PNML, otherwise the textual format)")->required();
    app.add_option("-x,--xml", s.xml_path, "MCC properties file (XML)");
    app.add_flag("--deadlock", s.deadlock, "Check whether a deadlock is reachable");
    app.add_option("--quasi-liveness", s.quasi_liveness, "Transitions to check for quasi-liveness (comma-separated)");
    app.add_option("--reachability", s.reachability, "Places to check for markability (comma-separated)");
    app.add_flag("--auto-reduce", s.auto_reduce, "Compute a structural reduction");
    app.add_option("--reduced-net", s.reduced_net, "Precomputed reduced net; equations are read from <path>.eq");
    app.add_option("--save-reduced-net", s.save_reduced_net, "Write the reduced net, and its equations to <path>.eq");
    app.add_option("--methods", s.methods, "Methods to run (INDUCTION BMC K_INDUCTION PDR STATE_EQUATION RANDOM_WALK CP ENUMERATION)");
    app.add_option("--timeout", s.timeout, "Per-property timeout in seconds")->check(CLI::PositiveNumber);
    app.add_option("--global-timeout", s.global_timeout, "Global timeout in seconds")->check(CLI::PositiveNumber);
    app.add_flag("--mcc", s.mcc, "Competition mode");
    app.add_flag("--debug", s.debug, "Print the SMT-LIB exchanged with the solver on stderr");
    app.add_flag("--show-techniques", s.output.show_techniques, "Print the methods that computed each verdict");
    app.add_flag("--show-time", s.output.show_time, "Print the time spent on each property");
    app.add_flag("--show-reduction-ratio", s.show_reduction_ratio, "Print the reduction ratio");
    app.add_flag("--show-model", s.output.show_model, "Print witness markings and traces");
    app.add_flag("--check-proof", s.check_proof, "Check verdict certificates");
    auto* export_opt =
        app.add_option("--export-proof", s.export_dir, "Export verdict certificates to a directory (default: proofs)")
            ->expected(0, 1);
    app.add_option("--solver", s.solver, "SMT solver executable (default: $PNREACH_SOLVER, then z3)");
    app.add_option("--seed", s.seed, "Random walk seed");
    app.add_flag("--colored", s.colored, "Colored nets (not supported)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "pnreach: " << e.what() << "\n";
        return 1;
    }
    s.export_proof = export_opt->count() > 0;
    if (s.export_proof && s.export_dir.empty()) s.export_dir = "proofs";

    if (s.colored) {
        err << "pnreach: colored nets are out of scope; unfold them to a place/transition net first\n";
        return 1;
    }

    try {
        const auto started = std::chrono::steady_clock::now();
        for (const auto& path : {s.net_path, s.xml_path, s.reduced_net})
            if (!path.empty() && !std::filesystem::exists(path)) throw UsageError("cannot open '" + path + "'");
        PetriNet net = load_net(s.net_path);
        std::vector<PropertyError> property_errors;
        std::vector<Query> queries = build_queries(s, net, property_errors);
        if (queries.empty() && property_errors.empty()) throw UsageError("no property to check");

        std::optional<ReducedInput> reduction = load_reduction(s, net);
        if (reduction && !s.save_reduced_net.empty()) {
            write_file(s.save_reduced_net, serialize_net(reduction->net));
            write_file(s.save_reduced_net + ".eq", serialize_reduction_system(reduction->system));
        }
        if (s.show_reduction_ratio) out << format_reduction_ratio(reduction_ratio(net, reduction->net)) << "\n";
        const bool use_reduction = reduction && (s.auto_reduce || !s.reduced_net.empty());

        PortfolioOptions options;
        options.solver = smt::SolverConfig::from_environment();
        if (!s.solver.empty()) {
            options.solver.executable = s.solver;
            options.solver.arguments = smt::SolverConfig::default_arguments(s.solver);
        }
        std::mutex io;
        if (s.debug)
            options.solver.debug_sink = [&](std::string_view line) {
                std::lock_guard lock(io);
                err << line << "\n";
            };
        options.methods.walk_seed = s.seed;
        options.reduction = use_reduction ? &*reduction : nullptr;
        options.log = [&](const std::string& text) {
            std::lock_guard lock(io);
            err << "pnreach: " << text << "\n";
        };

        auto timeout = std::chrono::milliseconds(std::chrono::seconds(s.timeout));
        JobPlan plan;
        if (!s.methods.empty())
            plan = single_wave_plan(parse_methods(s.methods), timeout);
        else if (s.mcc)
            plan = mcc_plan(timeout);
        else
            plan = single_wave_plan({std::begin(all_techniques), std::end(all_techniques)}, timeout);
        if (s.global_timeout > 0) plan.global_deadline = started + std::chrono::seconds(s.global_timeout);

        std::map<std::string, const Query*> by_id;
        for (const auto& q : queries) by_id[q.id] = &q;
        bool proof_failed = false;
        options.on_result = [&](const PortfolioResult& r) {
            std::lock_guard lock(io);
            for (const auto& line : format_result(r, s.output, net, reduction ? &reduction->net : nullptr))
                out << line << "\n";
            if (!r.verdict) {
                out.flush();
                return;
            }
            const Query& q = *by_id.at(r.query_id);
            std::optional<std::filesystem::path> exported;
            if (s.export_proof) exported = export_certificate(net, q, *r.verdict, s.export_dir, options.reduction);
            if (s.check_proof) {
                CertificateCheck c = exported ? check_exported(net, q, *exported, options.solver, options.reduction)
                                              : check_verdict(net, q, *r.verdict, options.reduction, options.solver);
                out << "CERTIFICATE " << r.query_id << " " << (c ? "VALID" : "INVALID " + c.reason) << "\n";
                if (!c) proof_failed = true;
            }
            out.flush();
        };

        for (const auto& e : property_errors) {
            out << "FORMULA " << e.id << " CANNOT_COMPUTE\n";
            err << "pnreach: property " << e.id << ": " << e.message << "\n";
        }
        run_portfolio(net, queries, plan, options);
        if (proof_failed) return 2;
        return property_errors.empty() ? 0 : 1;
    } catch (const UsageError& e) {
        err << "pnreach: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        err << "pnreach: " << e.what() << "\n";
        return 1;
    } catch (const ConflictingVerdicts& e) {
        err << "pnreach: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "pnreach: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace pnreach::cli
