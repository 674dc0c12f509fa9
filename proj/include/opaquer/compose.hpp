// opaquer: synchronous (parallel) composition of automata.
//
// Shared events move only when every owner is ready, private events interleave.
// Only the accessible part is built. Composed states are the comma-joined
// component state tokens, so composing a composition flattens naturally.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "opaquer/automaton.hpp"
#include "opaquer/errors.hpp"

namespace opaquer {

// Splits a comma-joined tuple state into exactly `arity` component tokens.
inline std::vector<std::string> split_state_tuple(const std::string& name, size_t arity) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : name) {
        if (c == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if (parts.size() != arity)
        throw ModelError("state '" + name + "' does not split into " + std::to_string(arity) +
                         " components");
    return parts;
}

inline std::string join_state_tuple(const std::vector<std::string>& parts) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ',';
        out += parts[i];
    }
    return out;
}

// Parallel composition of two automata, accessible part only. An event shared
// by both alphabets needs both transitions defined; a private event moves its
// owner and leaves the other component in place.
inline Automaton parallel_compose(const Automaton& a, const Automaton& b) {
    if (a.name() == b.name())
        throw ModelError("parallel_compose: duplicate automaton name '" + a.name() + "'");

    std::vector<std::string> alphabet = a.alphabet();
    for (const auto& e : b.alphabet())
        if (!a.has_event(e)) alphabet.push_back(e);

    struct Pair {
        int sa, sb;
        auto operator<=>(const Pair&) const = default;
    };
    std::map<Pair, int> index_of;
    std::vector<Pair> pairs;
    std::vector<std::string> states;
    std::vector<std::string> initial;
    auto intern = [&](Pair p) {
        auto [it, fresh] = index_of.emplace(p, static_cast<int>(pairs.size()));
        if (fresh) {
            pairs.push_back(p);
            states.push_back(a.states()[p.sa] + "," + b.states()[p.sb]);
        }
        return it->second;
    };

    for (int sa : a.initial_indices())
        for (int sb : b.initial_indices()) {
            intern({sa, sb});
            initial.push_back(a.states()[sa] + "," + b.states()[sb]);
        }

    std::vector<Automaton::Transition> transitions;
    // pairs grows while we scan it: plain BFS over the accessible part.
    for (size_t i = 0; i < pairs.size(); ++i) {
        Pair p = pairs[i];
        for (const auto& e : alphabet) {
            int ea = a.event_index(e), eb = b.event_index(e);
            int ta = p.sa, tb = p.sb;
            if (ea >= 0) {
                ta = a.step_index(p.sa, ea);
                if (ta < 0) continue;
            }
            if (eb >= 0) {
                tb = b.step_index(p.sb, eb);
                if (tb < 0) continue;
            }
            intern({ta, tb});
            transitions.push_back({states[i], e, a.states()[ta] + "," + b.states()[tb]});
        }
    }
    return Automaton(a.name() + "," + b.name(), states, alphabet, initial, transitions);
}

// Left fold of parallel_compose over all components; tuples flatten because
// state and automaton names are comma-joined. A single component composes to
// itself.
inline Automaton compose_all(const std::vector<Automaton>& components) {
    if (components.empty()) throw ModelError("compose_all: no components");
    Automaton acc = components[0];
    for (size_t i = 1; i < components.size(); ++i) acc = parallel_compose(acc, components[i]);
    return acc;
}

} // namespace opaquer
