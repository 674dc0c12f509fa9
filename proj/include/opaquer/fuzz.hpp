// opaquer: random system generation, soundness fuzzing, observer size
// measurement. Everything here is a pure function of its seed.
#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "opaquer/automaton.hpp"
#include "opaquer/compose.hpp"
#include "opaquer/errors.hpp"
#include "opaquer/local.hpp"
#include "opaquer/model_io.hpp"
#include "opaquer/observer.hpp"
#include "opaquer/opacity.hpp"

namespace opaquer {

struct GenParams {
    std::uint64_t seed = 1;
    int min_components = 2, max_components = 3;
    int min_states = 2, max_states = 6;
    int min_private_events = 1, max_private_events = 3;
    int min_shared_events = 0, max_shared_events = 2;
    double transition_density = 0.30;
    double observable_fraction = 0.5;  // chance a private event is observable
    bool force_assumption1 = true;     // shared events forced observable
    SecretKind secret_kind = SecretKind::CurrentState;
    double secret_density = 0.25;
    int max_secret_tuples = 6;
    int reachable_cap = 5000;          // BFS budget when sampling reachable tuples
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Distribution helpers with stable cross-platform behavior (std::mt19937_64
// output is pinned by the standard, the distribution classes are not).
inline int rand_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline double rand_real(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool chance(std::mt19937_64& rng, double p) { return rand_real(rng) < p; }

} // namespace detail

// A random modular system plus secret, deterministic in params.seed. Shared
// events live in every component alphabet; with force_assumption1 they are
// always observable. Secret tuples are sampled from reachable global tuples
// for current-state secrets (raw product fallback past the BFS budget) and
// from the initial product for initial-state secrets.
inline ModelDocument generate_system(const GenParams& params) {
    std::mt19937_64 rng(detail::splitmix64(params.seed));
    const int n = detail::rand_int(rng, params.min_components, params.max_components);
    const int shared = detail::rand_int(rng, params.min_shared_events, params.max_shared_events);

    std::vector<std::string> shared_events;
    for (int k = 0; k < shared; ++k) shared_events.push_back("sh" + std::to_string(k));

    ModelDocument doc;
    SystemDecl decl;
    for (int i = 0; i < n; ++i) {
        std::string name = "G" + std::to_string(i + 1);
        const int num_states = detail::rand_int(rng, params.min_states, params.max_states);
        std::vector<std::string> states;
        for (int s = 0; s < num_states; ++s)
            states.push_back("q" + std::to_string(i + 1) + "_" + std::to_string(s));
        const int num_private =
            detail::rand_int(rng, params.min_private_events, params.max_private_events);
        std::vector<std::string> alphabet;
        for (int e = 0; e < num_private; ++e) {
            std::string ev = "e" + std::to_string(i + 1) + "_" + std::to_string(e);
            alphabet.push_back(ev);
            bool obs = detail::chance(rng, params.observable_fraction);
            if (obs) decl.mask.observable.insert(ev);
        }
        alphabet.insert(alphabet.end(), shared_events.begin(), shared_events.end());
        std::vector<Automaton::Transition> transitions;
        for (const auto& from : states)
            for (const auto& ev : alphabet)
                if (detail::chance(rng, params.transition_density))
                    transitions.push_back(
                        {from, ev, states[detail::rand_int(rng, 0, num_states - 1)]});
        std::vector<std::string> initial{states[detail::rand_int(rng, 0, num_states - 1)]};
        if (num_states > 1 && detail::chance(rng, 0.4)) {
            std::string extra = states[detail::rand_int(rng, 0, num_states - 1)];
            if (std::find(initial.begin(), initial.end(), extra) == initial.end())
                initial.push_back(extra);
        }
        std::sort(initial.begin(), initial.end());
        doc.automata.emplace_back(name, states, alphabet, initial, transitions);
        decl.component_names.push_back(name);
    }
    for (const auto& ev : shared_events) {
        bool obs = params.force_assumption1 || detail::chance(rng, params.observable_fraction);
        if (obs) decl.mask.observable.insert(ev);
        else decl.mask.observable.erase(ev);
    }
    doc.system = std::move(decl);

    ModularSystem sys = doc.to_system();
    std::vector<std::vector<std::string>> candidates;
    if (params.secret_kind == SecretKind::InitialState) {
        std::vector<std::vector<std::string>> acc{{}};
        for (const auto& c : sys.components) {
            std::vector<std::vector<std::string>> next;
            for (const auto& prefix : acc)
                for (const auto& s : c.initial_states()) {
                    auto t = prefix;
                    t.push_back(s);
                    next.push_back(std::move(t));
                }
            acc = std::move(next);
        }
        candidates = std::move(acc);
    } else {
        // Bounded breadth-first reach over tuples, raw product fallback.
        std::set<std::vector<std::string>> seen;
        std::vector<std::vector<std::string>> frontier{{}};
        {
            std::vector<std::vector<std::string>> inits{{}};
            for (const auto& c : sys.components) {
                std::vector<std::vector<std::string>> next;
                for (const auto& prefix : inits)
                    for (const auto& s : c.initial_states()) {
                        auto t = prefix;
                        t.push_back(s);
                        next.push_back(std::move(t));
                    }
                inits = std::move(next);
            }
            frontier = std::move(inits);
        }
        bool over_budget = false;
        for (const auto& t : frontier) seen.insert(t);
        for (size_t at = 0; at < frontier.size(); ++at) {
            if (seen.size() > static_cast<size_t>(params.reachable_cap)) {
                over_budget = true;
                break;
            }
            for (const auto& ev : sys.union_alphabet()) {
                auto next = step_tuple(sys, frontier[at], ev);
                if (next && seen.insert(*next).second) frontier.push_back(*next);
            }
        }
        if (over_budget) {
            // sample raw product tuples instead
            seen.clear();
            for (int k = 0; k < params.reachable_cap && k < 64; ++k) {
                std::vector<std::string> t;
                for (const auto& c : sys.components)
                    t.push_back(c.states()[detail::rand_int(
                        rng, 0, static_cast<int>(c.states().size()) - 1)]);
                seen.insert(std::move(t));
            }
        }
        candidates.assign(seen.begin(), seen.end());
    }
    std::sort(candidates.begin(), candidates.end());

    GlobalSecret secret;
    secret.kind = params.secret_kind;
    secret.groups.emplace_back();
    for (const auto& t : candidates) {
        if (static_cast<int>(secret.groups[0].items.size()) >= params.max_secret_tuples) break;
        if (detail::chance(rng, params.secret_density))
            secret.groups[0].items.push_back({t, {}});
    }
    if (secret.groups[0].items.empty() && !candidates.empty())
        secret.groups[0].items.push_back(
            {candidates[detail::rand_int(rng, 0, static_cast<int>(candidates.size()) - 1)], {}});
    doc.secret = std::move(secret);
    return doc;
}

struct TrialOutcome {
    Outcome local = Outcome::Unknown;
    Outcome oracle = Outcome::Unknown;
};

// Local (theorems only) versus monolithic on one document. Throws
// ResourceError upward; callers decide whether to skip.
inline TrialOutcome run_soundness_trial(const ModelDocument& doc, Property property,
                                        std::uint64_t estimate_cap = kDefaultEstimateCap) {
    ModularSystem sys = doc.to_system();
    if (!doc.secret) throw ModelError("run_soundness_trial: document has no secret");
    VerifyOptions local;
    local.property = property;
    local.mode = Mode::Local;
    local.estimate_cap = estimate_cap;
    VerifyOptions mono = local;
    mono.mode = Mode::Monolithic;
    TrialOutcome out;
    out.local = verify(sys, *doc.secret, local).outcome;
    out.oracle = verify(sys, *doc.secret, mono).outcome;
    return out;
}

struct FuzzReport {
    std::uint64_t trials = 0;
    std::uint64_t local_opaque = 0;       // local certified, oracle agreed
    std::uint64_t gaps = 0;               // local Unknown, oracle Opaque
    std::uint64_t confirmed_not_opaque = 0;  // local Unknown, oracle NotOpaque
    std::uint64_t skipped = 0;            // resource cap hit
    std::vector<std::uint64_t> gap_seeds;
    std::vector<std::pair<std::uint64_t, std::string>> failures;  // seed, serialized doc

    bool sound() const { return failures.empty(); }
};

// Soundness fuzzing: on randomly generated systems the local method must
// never certify Opaque when the exact method says NotOpaque. Shared events
// are forced observable so the local theorems apply. Each trial reseeds
// deterministically from (params.seed, trial index).
inline FuzzReport fuzz_soundness(const GenParams& params, std::uint64_t trials, Property property,
                                 std::uint64_t estimate_cap = kDefaultEstimateCap) {
    FuzzReport report;
    GenParams p = params;
    p.force_assumption1 = true;
    p.secret_kind =
        property == Property::Iso ? SecretKind::InitialState : SecretKind::CurrentState;
    for (std::uint64_t t = 0; t < trials; ++t) {
        p.seed = detail::splitmix64(params.seed ^ (t * 0x9e3779b97f4a7c15ULL + 1));
        ModelDocument doc = generate_system(p);
        ++report.trials;
        TrialOutcome outcome;
        try {
            outcome = run_soundness_trial(doc, property, estimate_cap);
        } catch (const ResourceError&) {
            ++report.skipped;
            continue;
        }
        if (outcome.local == Outcome::Opaque) {
            if (outcome.oracle == Outcome::NotOpaque)
                report.failures.push_back({p.seed, serialize_model(doc)});
            else
                ++report.local_opaque;
        } else {
            if (outcome.oracle == Outcome::Opaque) {
                ++report.gaps;
                report.gap_seeds.push_back(p.seed);
            } else {
                ++report.confirmed_not_opaque;
            }
        }
    }
    return report;
}

// Verdict-preserving document mutations for hammering fixtures: reordered
// state declarations, reordered secret items, and a fresh isolated state.
// (Isolated states never join any estimate reachable from initial states and
// never enter initial-start cover pools.)
inline ModelDocument mutate_document(const ModelDocument& doc, std::uint64_t seed) {
    std::mt19937_64 rng(detail::splitmix64(seed));
    ModelDocument out = doc;
    for (auto& a : out.automata) {
        std::vector<std::string> states = a.states();
        for (size_t k = states.size(); k > 1; --k)
            std::swap(states[k - 1], states[detail::rand_int(rng, 0, static_cast<int>(k) - 1)]);
        if (detail::chance(rng, 0.5)) states.push_back("isolated_" + std::to_string(rng() % 1000));
        a = Automaton(a.name(), states, a.alphabet(), a.initial_states(), a.transitions());
    }
    if (out.secret) {
        for (auto& g : out.secret->groups) {
            for (size_t k = g.items.size(); k > 1; --k)
                std::swap(g.items[k - 1], g.items[detail::rand_int(rng, 0, static_cast<int>(k) - 1)]);
        }
    }
    return out;
}

struct SizeEntry {
    std::uint64_t size = 0;
    bool capped = false;
};

struct SizeReport {
    std::vector<SizeEntry> local_observers;
    std::uint64_t local_sum = 0;
    SizeEntry global_observer;
    double ratio = 0.0;  // local_sum / global, 0 when either side capped
};

// Observer sizes for one document: per component, summed, and for the
// composed system. Hitting the estimate cap marks the entry as capped rather
// than failing.
inline SizeReport measure_observer_sizes(const ModelDocument& doc,
                                         std::uint64_t estimate_cap = kDefaultEstimateCap) {
    ModularSystem sys = doc.to_system();
    SizeReport report;
    for (size_t i = 0; i < sys.components.size(); ++i) {
        SizeEntry entry;
        try {
            Observer o = build_observer(sys.components[i],
                                        sys.component_mask(static_cast<int>(i)), std::nullopt,
                                        estimate_cap);
            entry.size = o.estimates.size();
        } catch (const ResourceError&) {
            entry.capped = true;
        }
        report.local_observers.push_back(entry);
        report.local_sum += entry.size;
    }
    try {
        Automaton composed = compose_all(sys.components);
        Observer o = build_observer(composed, sys.mask, std::nullopt, estimate_cap);
        report.global_observer.size = o.estimates.size();
    } catch (const ResourceError&) {
        report.global_observer.capped = true;
    }
    bool any_capped = report.global_observer.capped;
    for (const auto& e : report.local_observers) any_capped = any_capped || e.capped;
    if (!any_capped && report.global_observer.size > 0)
        report.ratio = static_cast<double>(report.local_sum) /
                       static_cast<double>(report.global_observer.size);
    return report;
}

} // namespace opaquer
