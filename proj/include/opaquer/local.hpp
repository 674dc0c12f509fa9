// opaquer: compositional opacity verification.
//
// A modular system is a list of components plus one observation mask. The
// local method never composes: it certifies opacity of the whole from
// per-component checks on secret projections. It can answer Opaque (with a
// certificate naming the deciding component per secret block) or Unknown,
// never NotOpaque. Soundness needs every shared event to be observable; that
// assumption is a hard gate.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "opaquer/automaton.hpp"
#include "opaquer/compose.hpp"
#include "opaquer/errors.hpp"
#include "opaquer/observer.hpp"
#include "opaquer/opacity.hpp"

namespace opaquer {

struct ModularSystem {
    std::vector<Automaton> components;
    ObservationMask mask;

    int component_index(const std::string& name) const {
        for (size_t i = 0; i < components.size(); ++i)
            if (components[i].name() == name) return static_cast<int>(i);
        return -1;
    }

    ObservationMask component_mask(int i) const {
        return mask.restricted_to(components[i].alphabet());
    }

    std::vector<std::string> union_alphabet() const {
        std::set<std::string> all;
        for (const auto& c : components) all.insert(c.alphabet().begin(), c.alphabet().end());
        return {all.begin(), all.end()};
    }

    void validate() const {
        if (components.empty()) throw ModelError("system: no components");
        std::set<std::string> names;
        for (const auto& c : components)
            if (!names.insert(c.name()).second)
                throw ModelError("system: duplicate component '" + c.name() + "'");
    }
};

// One element of a global secret: either an explicit state tuple or a product
// of per-component state sets (all combinations).
struct SecretItem {
    std::vector<std::string> tuple;                 // used when product is empty
    std::vector<std::vector<std::string>> product;  // factor per component

    bool is_product() const { return !product.empty(); }
    size_t arity() const { return is_product() ? product.size() : tuple.size(); }

    bool contains(const std::vector<std::string>& t) const {
        if (!is_product()) return tuple == t;
        if (t.size() != product.size()) return false;
        for (size_t i = 0; i < t.size(); ++i)
            if (std::find(product[i].begin(), product[i].end(), t[i]) == product[i].end())
                return false;
        return true;
    }

    bool operator==(const SecretItem&) const = default;
};

struct SecretGroup {
    std::vector<SecretItem> items;
    bool operator==(const SecretGroup&) const = default;
};

enum class SecretKind { CurrentState, InitialState };

// Global secret: a set of composed-state tuples, optionally pre-grouped into
// blocks for the per-block rules.
struct GlobalSecret {
    SecretKind kind = SecretKind::CurrentState;
    std::vector<SecretGroup> groups;
    bool has_blocks = false;  // whether the grouping was declared, not derived

    bool empty() const {
        for (const auto& g : groups)
            if (!g.items.empty()) return false;
        return true;
    }

    bool contains(const std::vector<std::string>& tuple) const {
        for (const auto& g : groups)
            for (const auto& it : g.items)
                if (it.contains(tuple)) return true;
        return false;
    }

    bool operator==(const GlobalSecret&) const = default;
};

// Projection of one group onto component i: every state that appears in some
// secret tuple at position i. Sorted, unique.
inline std::vector<std::string> project_group(const SecretGroup& g, int i) {
    std::set<std::string> out;
    for (const auto& item : g.items) {
        if (item.is_product()) out.insert(item.product[i].begin(), item.product[i].end());
        else out.insert(item.tuple[i]);
    }
    return {out.begin(), out.end()};
}

inline std::vector<std::string> project_secret(const GlobalSecret& s, int i) {
    std::set<std::string> out;
    for (const auto& g : s.groups)
        for (const auto& n : project_group(g, i)) out.insert(n);
    return {out.begin(), out.end()};
}

inline constexpr std::uint64_t kDefaultExpansionCap = 100'000;

// All tuples denoted by a group, deduplicated, in declaration order (products
// expand odometer-style, leftmost set outermost).
inline std::vector<std::vector<std::string>> expand_group(const SecretGroup& g,
                                                          std::uint64_t cap = kDefaultExpansionCap) {
    std::vector<std::vector<std::string>> out;
    std::set<std::vector<std::string>> seen;
    auto add = [&](const std::vector<std::string>& tuple) {
        if (!seen.insert(tuple).second) return;
        out.push_back(tuple);
        if (out.size() > cap) throw ResourceError("secret expansion cap exceeded");
    };
    for (const auto& item : g.items) {
        if (!item.is_product()) {
            add(item.tuple);
            continue;
        }
        std::vector<std::string> tuple(item.product.size());
        auto rec = [&](auto&& self, size_t k) -> void {
            if (k == item.product.size()) {
                add(tuple);
                return;
            }
            for (const auto& s : item.product[k]) {
                tuple[k] = s;
                self(self, k + 1);
            }
        };
        rec(rec, 0);
    }
    return out;
}

// Checks a secret against the system it talks about: arity, existing states,
// and for initial-state secrets that every mentioned state is initial.
inline void validate_secret(const ModularSystem& sys, const GlobalSecret& secret) {
    const size_t n = sys.components.size();
    for (const auto& g : secret.groups)
        for (const auto& item : g.items) {
            if (item.arity() != n)
                throw ModelError("secret: tuple arity " + std::to_string(item.arity()) +
                                 " does not match " + std::to_string(n) + " components");
            for (size_t i = 0; i < n; ++i) {
                std::vector<std::string> parts =
                    item.is_product() ? item.product[i] : std::vector<std::string>{item.tuple[i]};
                if (parts.empty()) throw ModelError("secret: empty product factor");
                for (const auto& s : parts) {
                    int idx = sys.components[i].state_index(s);
                    if (idx < 0)
                        throw ModelError("secret: '" + s + "' is not a state of component '" +
                                         sys.components[i].name() + "'");
                    if (secret.kind == SecretKind::InitialState &&
                        !sys.components[i].is_initial(idx))
                        throw ModelError("secret: initial-state secret mentions '" + s +
                                         "', not initial in component '" +
                                         sys.components[i].name() + "'");
                }
            }
        }
}

// Every event shared by two or more components must be observable. Returns
// one witnessing component pair per violating event, sorted by event name.
inline std::vector<Assumption1Violation> check_assumption1(const ModularSystem& sys) {
    std::vector<Assumption1Violation> out;
    for (const auto& e : sys.union_alphabet()) {
        if (sys.mask.observes(e)) continue;
        int first = -1;
        for (size_t i = 0; i < sys.components.size(); ++i) {
            if (!sys.components[i].has_event(e)) continue;
            if (first < 0) {
                first = static_cast<int>(i);
            } else {
                out.push_back({e, sys.components[first].name(), sys.components[i].name()});
                break;
            }
        }
    }
    return out;
}

namespace detail {

inline void gate_assumption1(const ModularSystem& sys, const char* who) {
    auto violations = check_assumption1(sys);
    if (violations.empty()) return;
    std::string msg = std::string(who) + ": assumption violated, unobservable shared event";
    msg += violations.size() > 1 ? "s" : "";
    for (const auto& v : violations)
        msg += " '" + v.event + "' (" + v.component_a + "," + v.component_b + ")";
    throw ModelError(msg);
}

} // namespace detail

enum class DecompositionStrategy { Default, Whole, Singleton, Blocks };

// Secret blocks under a decomposition strategy. Default means: the declared
// blocks when the secret carries any, otherwise one block per tuple.
inline std::vector<SecretGroup> make_blocks(const GlobalSecret& secret,
                                            DecompositionStrategy strategy,
                                            std::uint64_t expansion_cap = kDefaultExpansionCap) {
    if (strategy == DecompositionStrategy::Default)
        strategy = secret.has_blocks ? DecompositionStrategy::Blocks
                                     : DecompositionStrategy::Singleton;
    switch (strategy) {
        case DecompositionStrategy::Whole: {
            SecretGroup all;
            for (const auto& g : secret.groups)
                all.items.insert(all.items.end(), g.items.begin(), g.items.end());
            if (all.items.empty()) return {};
            return {all};
        }
        case DecompositionStrategy::Singleton: {
            std::vector<SecretGroup> out;
            SecretGroup all;
            for (const auto& g : secret.groups)
                all.items.insert(all.items.end(), g.items.begin(), g.items.end());
            for (auto& tuple : expand_group(all, expansion_cap)) {
                SecretGroup g;
                g.items.push_back({std::move(tuple), {}});
                out.push_back(std::move(g));
            }
            return out;
        }
        case DecompositionStrategy::Blocks: {
            std::vector<SecretGroup> out;
            for (const auto& g : secret.groups)
                if (!g.items.empty()) out.push_back(g);
            return out;
        }
        case DecompositionStrategy::Default: break;
    }
    return {};
}

// Whole-secret rule for current-state opacity: the composition is opaque if
// some single component is opaque with respect to its secret projection.
// Components are tried in declaration order; Unknown when none certifies.
inline Verdict verify_local_theorem1(const ModularSystem& sys, const GlobalSecret& secret,
                                     std::uint64_t cap = kDefaultEstimateCap) {
    sys.validate();
    validate_secret(sys, secret);
    detail::gate_assumption1(sys, "verify_local_theorem1");
    for (size_t i = 0; i < sys.components.size(); ++i) {
        Verdict local = verify_cso(sys.components[i], sys.component_mask(static_cast<int>(i)),
                                   project_secret(secret, static_cast<int>(i)), cap);
        if (local.outcome == Outcome::Opaque) {
            Verdict v;
            v.outcome = Outcome::Opaque;
            v.method = "theorem1 i=" + std::to_string(i + 1);
            v.certificate = Certificate{false, {{0, static_cast<int>(i) + 1}}};
            return v;
        }
    }
    Verdict v;
    v.outcome = Outcome::Unknown;
    v.method = "theorem1";
    return v;
}

// Per-block rule for current-state opacity: each block needs one component
// whose estimates never sit inside the full secret projection while touching
// the block's projection. First satisfying component per block is certified.
inline Verdict verify_local_theorem2(const ModularSystem& sys, const GlobalSecret& secret,
                                     DecompositionStrategy strategy = DecompositionStrategy::Default,
                                     std::uint64_t cap = kDefaultEstimateCap,
                                     std::uint64_t expansion_cap = kDefaultExpansionCap) {
    sys.validate();
    validate_secret(sys, secret);
    detail::gate_assumption1(sys, "verify_local_theorem2");
    std::vector<SecretGroup> blocks = make_blocks(secret, strategy, expansion_cap);
    Certificate cert;
    cert.per_block = true;
    for (size_t j = 0; j < blocks.size(); ++j) {
        bool certified = false;
        for (size_t i = 0; i < sys.components.size(); ++i) {
            ConditionResult c = check_cso_subset_condition(
                sys.components[i], sys.component_mask(static_cast<int>(i)),
                project_group(blocks[j], static_cast<int>(i)),
                project_secret(secret, static_cast<int>(i)), cap);
            if (c.holds) {
                cert.entries.push_back({static_cast<int>(j) + 1, static_cast<int>(i) + 1});
                certified = true;
                break;
            }
        }
        if (!certified) {
            Verdict v;
            v.outcome = Outcome::Unknown;
            v.method = "theorem2";
            return v;
        }
    }
    Verdict v;
    v.outcome = Outcome::Opaque;
    v.method = "theorem2";
    v.certificate = std::move(cert);
    return v;
}

// Whole-secret rule for initial-state opacity; mirror of theorem 1.
inline Verdict verify_local_theorem3(const ModularSystem& sys, const GlobalSecret& secret,
                                     IsoWitnessStart start = IsoWitnessStart::Initial,
                                     std::uint64_t cap = kDefaultEstimateCap) {
    sys.validate();
    validate_secret(sys, secret);
    detail::gate_assumption1(sys, "verify_local_theorem3");
    for (size_t i = 0; i < sys.components.size(); ++i) {
        Verdict local = verify_iso(sys.components[i], sys.component_mask(static_cast<int>(i)),
                                   project_secret(secret, static_cast<int>(i)), start, cap);
        if (local.outcome == Outcome::Opaque) {
            Verdict v;
            v.outcome = Outcome::Opaque;
            v.method = "theorem3 i=" + std::to_string(i + 1);
            v.certificate = Certificate{false, {{0, static_cast<int>(i) + 1}}};
            return v;
        }
    }
    Verdict v;
    v.outcome = Outcome::Unknown;
    v.method = "theorem3";
    return v;
}

// Per-block rule for initial-state opacity; mirror of theorem 2.
inline Verdict verify_local_theorem4(const ModularSystem& sys, const GlobalSecret& secret,
                                     DecompositionStrategy strategy = DecompositionStrategy::Default,
                                     IsoWitnessStart start = IsoWitnessStart::Initial,
                                     std::uint64_t cap = kDefaultEstimateCap,
                                     std::uint64_t expansion_cap = kDefaultExpansionCap) {
    sys.validate();
    validate_secret(sys, secret);
    detail::gate_assumption1(sys, "verify_local_theorem4");
    std::vector<SecretGroup> blocks = make_blocks(secret, strategy, expansion_cap);
    Certificate cert;
    cert.per_block = true;
    for (size_t j = 0; j < blocks.size(); ++j) {
        bool certified = false;
        for (size_t i = 0; i < sys.components.size(); ++i) {
            ConditionResult c = check_iso_subset_condition(
                sys.components[i], sys.component_mask(static_cast<int>(i)),
                project_group(blocks[j], static_cast<int>(i)),
                project_secret(secret, static_cast<int>(i)), start, cap);
            if (c.holds) {
                cert.entries.push_back({static_cast<int>(j) + 1, static_cast<int>(i) + 1});
                certified = true;
                break;
            }
        }
        if (!certified) {
            Verdict v;
            v.outcome = Outcome::Unknown;
            v.method = "theorem4";
            return v;
        }
    }
    Verdict v;
    v.outcome = Outcome::Opaque;
    v.method = "theorem4";
    v.certificate = std::move(cert);
    return v;
}

// Direct execution of the composition semantics on component-state tuples.
// An event moves every component that owns it (all must be ready) and leaves
// the rest in place. nullopt when blocked.
inline std::optional<std::vector<std::string>> step_tuple(const ModularSystem& sys,
                                                          const std::vector<std::string>& tuple,
                                                          const std::string& event) {
    if (tuple.size() != sys.components.size())
        throw ModelError("step_tuple: tuple arity does not match component count");
    std::vector<std::string> next = tuple;
    bool owned = false;
    for (size_t i = 0; i < sys.components.size(); ++i) {
        const Automaton& c = sys.components[i];
        if (!c.has_event(event)) continue;
        owned = true;
        auto t = c.step(tuple[i], event);
        if (!t) return std::nullopt;
        next[i] = *t;
    }
    if (!owned) throw ModelError("step_tuple: event '" + event + "' not in any component alphabet");
    return next;
}

inline std::optional<std::vector<std::string>> run_tuple(const ModularSystem& sys,
                                                         std::vector<std::string> tuple,
                                                         const Word& word) {
    for (const auto& e : word) {
        auto next = step_tuple(sys, tuple, e);
        if (!next) return std::nullopt;
        tuple = std::move(*next);
    }
    return tuple;
}

// Builds a global word from a global run alpha and an observation-equivalent
// local run alpha_i of component i, such that component i follows alpha_i
// while every other component repeats its alpha path. Requires every shared
// event observable. The scan copies events outside component i, replaces each
// observable event of component i by the pending unobservable stretch of
// alpha_i plus that event, drops unobservable private events of component i,
// and flushes the unobservable tail of alpha_i at the end.
//
// x is the global start of alpha, x_i_prime the local start of alpha_i; the
// result is re-executed from x with slot i swapped to x_i_prime as a
// mandatory self-check.
inline Word lift_witness(const ModularSystem& sys, int i, const Word& alpha, const Word& alpha_i,
                         const std::vector<std::string>& x, const std::string& x_i_prime) {
    sys.validate();
    if (i < 0 || i >= static_cast<int>(sys.components.size()))
        throw ModelError("lift_witness: component index out of range");
    detail::gate_assumption1(sys, "lift_witness");
    const Automaton& comp = sys.components[i];

    auto from_x = run_tuple(sys, x, alpha);  // validates x and alpha along the way
    if (!from_x) throw ModelError("lift_witness: alpha is not executable from the given tuple");
    auto local_end = comp.run(x_i_prime, alpha_i);
    if (!local_end)
        throw ModelError("lift_witness: alpha_i is not executable from '" + x_i_prime + "'");

    ObservationMask mask_i = sys.component_mask(i);
    Word alpha_proj;
    for (const auto& e : alpha)
        if (comp.has_event(e)) alpha_proj.push_back(e);
    if (obs_project(alpha_i, mask_i) != obs_project(alpha_proj, mask_i))
        throw ModelError("lift_witness: alpha_i and the projection of alpha observe differently");

    Word lifted;
    size_t cursor = 0;
    auto flush_unobservable = [&] {
        while (cursor < alpha_i.size() && !sys.mask.observes(alpha_i[cursor]))
            lifted.push_back(alpha_i[cursor++]);
    };
    for (const auto& e : alpha) {
        if (!comp.has_event(e)) {
            lifted.push_back(e);
            continue;
        }
        if (sys.mask.observes(e)) {
            flush_unobservable();
            if (cursor >= alpha_i.size() || alpha_i[cursor] != e)
                throw std::logic_error("lift_witness: observable event misalignment");
            lifted.push_back(e);
            ++cursor;
        }
        // unobservable events of component i in alpha are private here and
        // are replaced by alpha_i's moves
    }
    flush_unobservable();
    if (cursor != alpha_i.size())
        throw std::logic_error("lift_witness: alpha_i not exhausted after scan");

    std::vector<std::string> x_prime = x;
    x_prime[i] = x_i_prime;
    auto end = run_tuple(sys, x_prime, lifted);
    if (!end) throw std::logic_error("lift_witness: lifted word does not execute");
    for (size_t k = 0; k < end->size(); ++k) {
        const std::string& expect = k == static_cast<size_t>(i) ? *local_end : (*from_x)[k];
        if ((*end)[k] != expect)
            throw std::logic_error("lift_witness: lifted run ends in an unexpected state");
    }
    if (obs_project(lifted, sys.mask) != obs_project(alpha, sys.mask))
        throw std::logic_error("lift_witness: lifted word observes differently");
    return lifted;
}

enum class Property { Cso, Iso };
enum class Mode { Local, Monolithic, Auto };

struct VerifyOptions {
    Property property = Property::Cso;
    Mode mode = Mode::Auto;
    DecompositionStrategy decomposition = DecompositionStrategy::Default;
    IsoWitnessStart iso_start = IsoWitnessStart::Initial;
    std::uint64_t estimate_cap = kDefaultEstimateCap;
    std::uint64_t expansion_cap = kDefaultExpansionCap;
};

// Secret states of the composed automaton, as composed-state names. For
// initial-state secrets every tuple is initial in the composition by
// validation, so nothing is lost; for current-state secrets unreachable
// tuples drop out (no generated run can end there).
inline std::vector<std::string> composed_secret_states(const Automaton& composed,
                                                       const ModularSystem& sys,
                                                       const GlobalSecret& secret) {
    std::vector<std::string> out;
    const size_t n = sys.components.size();
    const auto& pool =
        secret.kind == SecretKind::InitialState ? composed.initial_states() : composed.states();
    for (const auto& name : pool)
        if (secret.contains(split_state_tuple(name, n))) out.push_back(name);
    return out;
}

// One entry point covering both properties and all modes. Local mode applies
// the whole-secret rule then the per-block rule and never composes; it
// refuses systems with unobservable shared events. Monolithic mode composes
// and decides exactly. Auto runs local first and falls back to monolithic
// when local cannot certify (including when the assumption gate fails, which
// is reported in the verdict).
inline Verdict verify(const ModularSystem& sys, const GlobalSecret& secret,
                      const VerifyOptions& options) {
    sys.validate();
    validate_secret(sys, secret);
    if ((options.property == Property::Cso) != (secret.kind == SecretKind::CurrentState))
        throw ModelError("verify: requested property does not match the secret kind");

    auto run_local = [&]() -> Verdict {
        if (options.property == Property::Cso) {
            Verdict v = verify_local_theorem1(sys, secret, options.estimate_cap);
            if (v.outcome == Outcome::Opaque) return v;
            return verify_local_theorem2(sys, secret, options.decomposition, options.estimate_cap,
                                         options.expansion_cap);
        }
        Verdict v = verify_local_theorem3(sys, secret, options.iso_start, options.estimate_cap);
        if (v.outcome == Outcome::Opaque) return v;
        return verify_local_theorem4(sys, secret, options.decomposition, options.iso_start,
                                     options.estimate_cap, options.expansion_cap);
    };
    auto run_monolithic = [&]() -> Verdict {
        Automaton composed = compose_all(sys.components);
        std::vector<std::string> s = composed_secret_states(composed, sys, secret);
        if (options.property == Property::Cso)
            return verify_cso(composed, sys.mask, s, options.estimate_cap);
        return verify_iso(composed, sys.mask, s, options.iso_start, options.estimate_cap);
    };

    std::vector<Assumption1Violation> violations = check_assumption1(sys);
    switch (options.mode) {
        case Mode::Local: {
            Verdict v = run_local();  // gate inside throws on violations
            v.assumption1 = violations;
            return v;
        }
        case Mode::Monolithic:
            return run_monolithic();
        case Mode::Auto: {
            if (violations.empty()) {
                Verdict v = run_local();
                v.assumption1 = violations;
                if (v.outcome == Outcome::Opaque) return v;
            }
            Verdict v = run_monolithic();
            v.assumption1 = violations;
            return v;
        }
    }
    throw std::logic_error("verify: unreachable");
}

} // namespace opaquer
