// opaquer: opacity verification for modular discrete event systems.
//
// Subcommands:
//   verify    decide CSO/ISO locally, monolithically, or auto (local first)
//   compose   write the parallel composition as a plain automaton file
//   observer  write a component's observer as a plain automaton file
//   check     well-formedness + shared-events-observable report
//   lift      lift a local covering run to a global one (witness transport)
//   bench     soundness fuzzing / observer size measurement
//
// Exit codes: 0 opaque, 1 not-opaque, 2 unknown, 3 input error, 4 resource
// cap. `OPAQUER_STATE_CAP` overrides the estimate cap for all subcommands.

#include <CLI11.hpp>
#include <opaquer/opaquer.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using namespace opaquer;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelError("cannot write '" + path + "'");
    out << text;
}

std::uint64_t estimate_cap_from_env() {
    const char* raw = std::getenv("OPAQUER_STATE_CAP");
    if (raw == nullptr || *raw == '\0') return kDefaultEstimateCap;
    char* rest = nullptr;
    unsigned long long value = std::strtoull(raw, &rest, 10);
    if (rest == raw || *rest != '\0' || value == 0)
        throw ModelError("OPAQUER_STATE_CAP must be a positive integer, got '" +
                         std::string(raw) + "'");
    return static_cast<std::uint64_t>(value);
}

struct VerifyArgs {
    std::string model;
    std::string property;  // empty = take the secret's kind
    std::string mode = "auto";
    std::string decompose;  // empty = blocks when declared, else singleton
    std::string iso_start = "initial";
};

int run_verify(const VerifyArgs& args) {
    ModelDocument doc = parse_model(read_file(args.model));
    if (!doc.secret) throw ModelError("'" + args.model + "' has no secret block");
    ModularSystem sys = doc.to_system();

    VerifyOptions options;
    options.estimate_cap = estimate_cap_from_env();
    if (args.property.empty())
        options.property =
            doc.secret->kind == SecretKind::InitialState ? Property::Iso : Property::Cso;
    else
        options.property = args.property == "iso" ? Property::Iso : Property::Cso;
    options.mode = args.mode == "local"        ? Mode::Local
                   : args.mode == "monolithic" ? Mode::Monolithic
                                               : Mode::Auto;
    if (args.decompose == "whole")
        options.decomposition = DecompositionStrategy::Whole;
    else if (args.decompose == "singleton")
        options.decomposition = DecompositionStrategy::Singleton;
    else if (args.decompose == "blocks")
        options.decomposition = DecompositionStrategy::Blocks;
    options.iso_start = args.iso_start == "any" ? IsoWitnessStart::Any : IsoWitnessStart::Initial;

    Verdict v = verify(sys, *doc.secret, options);
    std::cout << serialize_verdict(v);
    return exit_code_for(v);
}

int run_compose(const std::string& model, const std::string& out_path) {
    ModelDocument doc = parse_model(read_file(model));
    ModularSystem sys = doc.to_system();
    sys.validate();
    write_output(out_path, serialize_automaton(compose_all(sys.components)));
    return 0;
}

int run_observer(const std::string& model, const std::string& component,
                 const std::string& out_path) {
    ModelDocument doc = parse_model(read_file(model));
    ModularSystem sys = doc.to_system();
    int i = sys.component_index(component);
    if (i < 0) throw ModelError("no component named '" + component + "'");
    Observer o = build_observer(sys.components[i], sys.component_mask(i), std::nullopt,
                                estimate_cap_from_env());
    write_output(out_path, serialize_automaton(observer_to_automaton(o)));
    return 0;
}

int run_check(const std::string& model) {
    ModelDocument doc = parse_model(read_file(model));
    std::cout << "model: ok\n";
    if (!doc.system) return 0;
    ModularSystem sys = doc.to_system();
    sys.validate();
    std::vector<Assumption1Violation> violations = check_assumption1(sys);
    if (violations.empty()) {
        std::cout << "assumption1: ok\n";
        return 0;
    }
    std::cout << "assumption1: violated";
    for (const auto& v : violations) std::cout << ' ' << v.event;
    std::cout << "\n";
    for (const auto& v : violations)
        std::cout << "detail: " << v.event << " shared by " << v.component_a << ","
                  << v.component_b << " but unobservable\n";
    return 3;
}

struct LiftArgs {
    std::string model;
    std::string component;
    std::string alpha_path;
    std::string alpha_i_path;
};

// The library takes explicit start states; the command derives them: the
// lexicographically smallest initial tuple running alpha, and the smallest
// component state running alpha-i. Deterministic, so runs are reproducible.
int run_lift(const LiftArgs& args) {
    ModelDocument doc = parse_model(read_file(args.model));
    ModularSystem sys = doc.to_system();
    sys.validate();

    int i = -1;
    try {
        size_t used = 0;
        int parsed = std::stoi(args.component, &used);
        if (used == args.component.size()) i = parsed - 1;  // 1-based on the command line
    } catch (const std::exception&) {
    }
    if (i < 0) i = sys.component_index(args.component);
    if (i < 0 || i >= static_cast<int>(sys.components.size()))
        throw ModelError("no component '" + args.component + "'");

    Word alpha = parse_word_file(read_file(args.alpha_path));
    Word alpha_i = parse_word_file(read_file(args.alpha_i_path));

    std::vector<std::vector<std::string>> pools;
    for (const auto& c : sys.components) {
        auto names = c.initial_states();
        std::sort(names.begin(), names.end());
        pools.push_back(std::move(names));
    }
    const size_t n = pools.size();
    std::vector<size_t> at(n, 0);
    std::optional<std::vector<std::string>> start;
    while (true) {
        std::vector<std::string> tuple;
        for (size_t k = 0; k < n; ++k) tuple.push_back(pools[k][at[k]]);
        if (run_tuple(sys, tuple, alpha)) {
            start = tuple;
            break;
        }
        size_t k = n;
        while (k > 0 && ++at[k - 1] == pools[k - 1].size()) at[--k] = 0;
        if (k == 0) break;
    }
    if (!start) throw ModelError("alpha does not run from any initial tuple");

    auto local_states = sys.components[i].states();
    std::sort(local_states.begin(), local_states.end());
    std::optional<std::string> local_start;
    for (const auto& s : local_states)
        if (sys.components[i].run(s, alpha_i)) {
            local_start = s;
            break;
        }
    if (!local_start)
        throw ModelError("alpha-i does not run from any state of '" +
                         sys.components[i].name() + "'");

    Word lifted = lift_witness(sys, i, alpha, alpha_i, *start, *local_start);
    std::vector<std::string> from = *start;
    from[static_cast<size_t>(i)] = *local_start;
    auto end = run_tuple(sys, from, lifted);

    std::cout << "start: " << join_state_tuple(*start) << "\n";
    std::cout << "local-start: " << *local_start << "\n";
    std::cout << "alpha-prime: " << (lifted.empty() ? "-" : join_word(lifted)) << "\n";
    std::cout << "end: " << join_state_tuple(*end) << "\n";
    return 0;
}

GenParams load_params(const std::string& path) {
    GenParams p;
    if (path.empty()) return p;
    std::istringstream in(read_file(path));
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
        ++number;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::string key;
        if (!(ls >> key)) continue;
        auto want_int = [&](int& field) {
            if (!(ls >> field)) throw ModelError("params line " + std::to_string(number) +
                                                 ": expected integer after '" + key + "'");
        };
        auto want_real = [&](double& field) {
            if (!(ls >> field)) throw ModelError("params line " + std::to_string(number) +
                                                 ": expected number after '" + key + "'");
        };
        if (key == "min_components") want_int(p.min_components);
        else if (key == "max_components") want_int(p.max_components);
        else if (key == "min_states") want_int(p.min_states);
        else if (key == "max_states") want_int(p.max_states);
        else if (key == "min_private_events") want_int(p.min_private_events);
        else if (key == "max_private_events") want_int(p.max_private_events);
        else if (key == "min_shared_events") want_int(p.min_shared_events);
        else if (key == "max_shared_events") want_int(p.max_shared_events);
        else if (key == "transition_density") want_real(p.transition_density);
        else if (key == "observable_fraction") want_real(p.observable_fraction);
        else if (key == "secret_density") want_real(p.secret_density);
        else if (key == "max_secret_tuples") want_int(p.max_secret_tuples);
        else if (key == "reachable_cap") want_int(p.reachable_cap);
        else
            throw ModelError("params line " + std::to_string(number) + ": unknown key '" + key +
                             "'");
    }
    return p;
}

struct BenchArgs {
    std::uint64_t seed = 1;
    std::uint64_t trials = 100;
    std::string property = "cso";
    std::string params_path;
    bool measure_sizes = false;
};

int run_bench(const BenchArgs& args) {
    GenParams params = load_params(args.params_path);
    params.seed = args.seed;
    const std::uint64_t cap = estimate_cap_from_env();
    const auto t0 = std::chrono::steady_clock::now();
    auto wall_ms = [&]() {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    };

    if (args.measure_sizes) {
        std::uint64_t total_local = 0, total_global = 0, capped = 0;
        std::ostringstream lines;
        for (std::uint64_t t = 0; t < args.trials; ++t) {
            GenParams p = params;
            p.seed = detail::splitmix64(args.seed ^ (t * 0x9e3779b97f4a7c15ULL + 1));
            p.secret_kind = args.property == "iso" ? SecretKind::InitialState
                                                   : SecretKind::CurrentState;
            ModelDocument doc = generate_system(p);
            SizeReport rep = measure_observer_sizes(doc, cap);
            bool any_capped = rep.global_observer.capped;
            for (const auto& e : rep.local_observers) any_capped = any_capped || e.capped;
            if (any_capped) {
                ++capped;
                lines << "stat: trial " << t << " seed " << p.seed << " capped\n";
                continue;
            }
            total_local += rep.local_sum;
            total_global += rep.global_observer.size;
            lines << "stat: trial " << t << " seed " << p.seed << " local-sum " << rep.local_sum
                  << " global " << rep.global_observer.size << " ratio " << rep.ratio << "\n";
        }
        Verdict v;
        v.outcome = capped == 0 ? Outcome::Opaque : Outcome::Unknown;
        v.method = "bench-sizes";
        std::cout << serialize_verdict(v);
        std::cout << lines.str();
        std::cout << "stat: total-local-sum " << total_local << "\n";
        std::cout << "stat: total-global " << total_global << "\n";
        std::cout << "stat: capped-trials " << capped << "\n";
        std::cout << "stat: wall-ms " << wall_ms() << "\n";
        return exit_code_for(v);
    }

    Property property = args.property == "iso" ? Property::Iso : Property::Cso;
    FuzzReport report = fuzz_soundness(params, args.trials, property, cap);
    Verdict v;
    v.outcome = report.sound() ? Outcome::Opaque : Outcome::NotOpaque;
    v.method = "bench-soundness";
    std::cout << serialize_verdict(v);
    std::cout << "stat: trials " << report.trials << "\n";
    std::cout << "stat: local-opaque " << report.local_opaque << "\n";
    std::cout << "stat: gaps " << report.gaps << "\n";
    std::cout << "stat: confirmed-not-opaque " << report.confirmed_not_opaque << "\n";
    std::cout << "stat: skipped " << report.skipped << "\n";
    for (const auto& [seed, text] : report.failures) {
        std::cout << "stat: failure-seed " << seed << "\n";
        std::cerr << "# soundness failure, seed " << seed << "\n" << text;
    }
    std::cout << "stat: wall-ms " << wall_ms() << "\n";
    return exit_code_for(v);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"opacity verification for modular discrete event systems"};
    app.require_subcommand(1);

    VerifyArgs verify_args;
    auto* verify_cmd = app.add_subcommand("verify", "decide opacity of the model's secret");
    verify_cmd->add_option("model", verify_args.model, "model file")->required();
    verify_cmd->add_option("--property", verify_args.property, "property to decide")
        ->check(CLI::IsMember({"cso", "iso"}));
    verify_cmd->add_option("--mode", verify_args.mode, "verification mode")
        ->check(CLI::IsMember({"local", "monolithic", "auto"}));
    verify_cmd->add_option("--decompose", verify_args.decompose, "secret decomposition")
        ->check(CLI::IsMember({"whole", "singleton", "blocks"}));
    verify_cmd
        ->add_option("--iso-witness-start", verify_args.iso_start,
                     "where covering runs may start")
        ->check(CLI::IsMember({"initial", "any"}));

    std::string compose_model, compose_out;
    auto* compose_cmd = app.add_subcommand("compose", "write the parallel composition");
    compose_cmd->add_option("model", compose_model, "model file")->required();
    compose_cmd->add_option("-o,--output", compose_out, "output file (default stdout)");

    std::string observer_model, observer_component, observer_out;
    auto* observer_cmd = app.add_subcommand("observer", "write a component's observer");
    observer_cmd->add_option("model", observer_model, "model file")->required();
    observer_cmd->add_option("--component", observer_component, "component name")->required();
    observer_cmd->add_option("-o,--output", observer_out, "output file (default stdout)");

    std::string check_model;
    auto* check_cmd = app.add_subcommand("check", "well-formedness and observability report");
    check_cmd->add_option("model", check_model, "model file")->required();

    LiftArgs lift_args;
    auto* lift_cmd = app.add_subcommand("lift", "lift a local run to the composition");
    lift_cmd->add_option("model", lift_args.model, "model file")->required();
    lift_cmd->add_option("--component", lift_args.component, "component index (1-based) or name")
        ->required();
    lift_cmd->add_option("--alpha", lift_args.alpha_path, "global word file")->required();
    lift_cmd->add_option("--alpha-i", lift_args.alpha_i_path, "local word file")->required();

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "fuzz soundness or measure observer sizes");
    bench_cmd->add_option("--seed", bench_args.seed, "campaign seed");
    bench_cmd->add_option("--trials", bench_args.trials, "number of trials");
    bench_cmd->add_option("--property", bench_args.property, "property to fuzz")
        ->check(CLI::IsMember({"cso", "iso"}));
    bench_cmd->add_option("--params", bench_args.params_path, "generator parameter file");
    bench_cmd->add_flag("--measure-sizes", bench_args.measure_sizes,
                        "measure observer sizes instead of fuzzing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        if (verify_cmd->parsed()) return run_verify(verify_args);
        if (compose_cmd->parsed()) return run_compose(compose_model, compose_out);
        if (observer_cmd->parsed())
            return run_observer(observer_model, observer_component, observer_out);
        if (check_cmd->parsed()) return run_check(check_model);
        if (lift_cmd->parsed()) return run_lift(lift_args);
        if (bench_cmd->parsed()) return run_bench(bench_args);
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ResourceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 70;
    }
    return 0;
}
