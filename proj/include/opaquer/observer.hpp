// opaquer: state estimation under partial observation.
//
// The observer is the subset construction over observable events with
// unobservable closure; its states ("estimates") are the sets of states the
// system can be in after an observation. Estimates are canonical sorted index
// vectors and empty successors are omitted, so the observer is a partial
// deterministic automaton whose language is exactly the observed language.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "opaquer/automaton.hpp"
#include "opaquer/errors.hpp"

namespace opaquer {

inline constexpr std::uint64_t kDefaultEstimateCap = std::uint64_t{1} << 20;

// States reachable from `from` via unobservable events only (reflexive).
inline std::vector<int> unobservable_reach_indices(const Automaton& a,
                                                   const std::vector<int>& from,
                                                   const ObservationMask& mask) {
    std::vector<char> seen(a.num_states(), 0);
    std::vector<int> stack;
    for (int s : from) {
        if (s < 0 || s >= a.num_states()) throw ModelError("unobservable_reach: state index out of range");
        if (!seen[s]) {
            seen[s] = 1;
            stack.push_back(s);
        }
    }
    std::vector<int> unobs_events;
    for (int e = 0; e < a.num_events(); ++e)
        if (!mask.observes(a.alphabet()[e])) unobs_events.push_back(e);
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        for (int e : unobs_events) {
            int t = a.step_index(s, e);
            if (t >= 0 && !seen[t]) {
                seen[t] = 1;
                stack.push_back(t);
            }
        }
    }
    std::vector<int> out;
    for (int s = 0; s < a.num_states(); ++s)
        if (seen[s]) out.push_back(s);
    return out;
}

inline std::vector<std::string> unobservable_reach(const Automaton& a,
                                                   const std::vector<std::string>& from,
                                                   const ObservationMask& mask) {
    std::vector<int> idx;
    for (const auto& s : from) {
        int i = a.state_index(s);
        if (i < 0) throw ModelError("unobservable_reach: unknown state '" + s + "'");
        idx.push_back(i);
    }
    std::vector<std::string> out;
    for (int s : unobservable_reach_indices(a, idx, mask)) out.push_back(a.states()[s]);
    return out;
}

struct Observer {
    std::string source_name;
    std::vector<std::string> source_states;   // index space of the estimates
    std::vector<std::string> alphabet;        // observable events, sorted by name
    std::vector<std::vector<int>> estimates;  // sorted source-state indices; [0] = initial
    std::vector<std::vector<int>> delta;      // delta[estimate][event], -1 = undefined
    int initial = 0;

    int event_index(const std::string& e) const {
        auto it = std::lower_bound(alphabet.begin(), alphabet.end(), e);
        if (it == alphabet.end() || *it != e) return -1;
        return static_cast<int>(it - alphabet.begin());
    }

    std::vector<std::string> estimate_names(int id) const {
        std::vector<std::string> out;
        for (int s : estimates[id]) out.push_back(source_states[s]);
        std::sort(out.begin(), out.end());
        return out;
    }
};

// Subset construction from `init` (defaults to the initial states). Estimates
// beyond `cap` raise ResourceError. Events not in the source alphabet never
// appear; unobservable events are folded into the closure.
inline Observer build_observer(const Automaton& a, const ObservationMask& mask,
                               std::optional<std::vector<std::string>> init = std::nullopt,
                               std::uint64_t cap = kDefaultEstimateCap) {
    std::vector<int> seed;
    if (init) {
        if (init->empty()) throw ModelError("build_observer: empty initial state set");
        std::set<int> uniq;
        for (const auto& s : *init) {
            int i = a.state_index(s);
            if (i < 0) throw ModelError("build_observer: unknown state '" + s + "'");
            uniq.insert(i);
        }
        seed.assign(uniq.begin(), uniq.end());
    } else {
        seed = a.initial_indices();
    }

    Observer o;
    o.source_name = a.name();
    o.source_states = a.states();
    std::vector<int> obs_events;
    for (int e = 0; e < a.num_events(); ++e)
        if (mask.observes(a.alphabet()[e])) obs_events.push_back(e);
    std::sort(obs_events.begin(), obs_events.end(),
              [&](int l, int r) { return a.alphabet()[l] < a.alphabet()[r]; });
    for (int e : obs_events) o.alphabet.push_back(a.alphabet()[e]);

    std::map<std::vector<int>, int> id_of;
    auto intern = [&](std::vector<int> est) {
        auto [it, fresh] = id_of.emplace(std::move(est), static_cast<int>(o.estimates.size()));
        if (fresh) {
            if (o.estimates.size() >= cap)
                throw ResourceError("build_observer: estimate cap of " + std::to_string(cap) +
                                    " exceeded on '" + a.name() + "'");
            o.estimates.push_back(it->first);
            o.delta.emplace_back(o.alphabet.size(), -1);
        }
        return it->second;
    };

    o.initial = intern(unobservable_reach_indices(a, seed, mask));
    for (size_t cur = 0; cur < o.estimates.size(); ++cur) {
        for (size_t k = 0; k < obs_events.size(); ++k) {
            std::set<int> moved;
            for (int s : o.estimates[cur]) {
                int t = a.step_index(s, obs_events[k]);
                if (t >= 0) moved.insert(t);
            }
            if (moved.empty()) continue;  // no run continues here: successor omitted
            std::vector<int> next = unobservable_reach_indices(
                a, std::vector<int>(moved.begin(), moved.end()), mask);
            o.delta[cur][k] = intern(std::move(next));
        }
    }
    return o;
}

// Estimate index after observation w, -1 when w is not an observation of any
// generated word. Events unknown to the observer make it undefined too.
inline int estimate_after(const Observer& o, const Word& w) {
    int cur = o.initial;
    for (const auto& e : w) {
        int k = o.event_index(e);
        if (k < 0) return -1;
        cur = o.delta[cur][k];
        if (cur < 0) return -1;
    }
    return cur;
}

struct InclusionResult {
    bool holds = true;
    Word counterexample;  // shortest, lexicographic tie-break; meaningful when !holds
};

// Is every observation of lhs also an observation of rhs? Both languages are
// prefix-closed, so a synchronized breadth-first walk finds the shortest
// offending extension; events are tried in name order for a deterministic
// lexicographic tie-break.
inline InclusionResult observed_language_included(const Observer& lhs, const Observer& rhs) {
    struct Node {
        int l, r;
        auto operator<=>(const Node&) const = default;
    };
    std::map<Node, std::pair<Node, int>> parent;  // child -> (parent, lhs event)
    std::queue<Node> queue;
    Node start{lhs.initial, rhs.initial};
    parent.emplace(start, std::make_pair(start, -1));
    queue.push(start);
    while (!queue.empty()) {
        Node n = queue.front();
        queue.pop();
        for (size_t k = 0; k < lhs.alphabet.size(); ++k) {
            int nl = lhs.delta[n.l][k];
            if (nl < 0) continue;
            int rk = rhs.event_index(lhs.alphabet[k]);
            int nr = rk < 0 ? -1 : rhs.delta[n.r][rk];
            if (nr < 0) {
                Word w;
                Node at = n;
                int ev = static_cast<int>(k);
                while (ev >= 0) {
                    w.push_back(lhs.alphabet[ev]);
                    auto& [p, pe] = parent.at(at);
                    at = p;
                    ev = pe;
                }
                std::reverse(w.begin(), w.end());
                return {false, std::move(w)};
            }
            Node child{nl, nr};
            if (parent.emplace(child, std::make_pair(n, static_cast<int>(k))).second)
                queue.push(child);
        }
    }
    return {};
}

// A concrete run witnessing an observation: some (start, word) with
// start in `init`, obs_project(word) == w and an end state outside
// `avoid_ends` (pass the empty set to accept any end). Search is
// breadth-first over (state, consumed prefix of w), so the run is shortest
// with lexicographic tie-break. nullopt when no such run exists.
inline std::optional<std::pair<std::string, Word>> find_run_with_observation(
    const Automaton& a, const std::vector<std::string>& init, const Word& w,
    const ObservationMask& mask, const std::set<std::string>& avoid_ends = {}) {
    std::vector<int> wi;
    for (const auto& e : w) {
        int k = a.event_index(e);
        if (k < 0) return std::nullopt;  // not over this alphabet: no run observes it
        wi.push_back(k);
    }
    std::vector<int> by_name(a.num_events());
    for (int i = 0; i < a.num_events(); ++i) by_name[i] = i;
    std::sort(by_name.begin(), by_name.end(),
              [&](int l, int r) { return a.alphabet()[l] < a.alphabet()[r]; });

    const int positions = static_cast<int>(wi.size()) + 1;
    auto key = [&](int state, int pos) { return state * positions + pos; };
    std::vector<std::pair<int, int>> from(static_cast<size_t>(a.num_states()) * positions,
                                          {-1, -1});  // (parent key, event index)
    std::vector<char> seen(from.size(), 0);
    std::queue<int> queue;
    std::vector<int> starts;
    for (const auto& s : init) {
        int i = a.state_index(s);
        if (i < 0) throw ModelError("find_run_with_observation: unknown state '" + s + "'");
        starts.push_back(i);
    }
    std::sort(starts.begin(), starts.end(), [&](int l, int r) { return a.states()[l] < a.states()[r]; });
    for (int s : starts) {
        int k = key(s, 0);
        if (!seen[k]) {
            seen[k] = 1;
            queue.push(k);
        }
    }
    auto extract = [&](int end_key) {
        Word word;
        int at = end_key;
        while (from[at].first >= 0) {
            word.push_back(a.alphabet()[from[at].second]);
            at = from[at].first;
        }
        std::reverse(word.begin(), word.end());
        return std::make_pair(a.states()[at / positions], std::move(word));
    };
    while (!queue.empty()) {
        int k = queue.front();
        queue.pop();
        int state = k / positions, pos = k % positions;
        if (pos == static_cast<int>(wi.size()) && !avoid_ends.count(a.states()[state]))
            return extract(k);
        for (int e : by_name) {
            int t = a.step_index(state, e);
            if (t < 0) continue;
            int npos;
            if (mask.observes(a.alphabet()[e])) {
                if (pos >= static_cast<int>(wi.size()) || e != wi[pos]) continue;
                npos = pos + 1;
            } else {
                npos = pos;
            }
            int nk = key(t, npos);
            if (!seen[nk]) {
                seen[nk] = 1;
                from[nk] = {k, e};
                queue.push(nk);
            }
        }
    }
    return std::nullopt;
}

// Observer exported as an automaton; estimate states print as {s1|s2|...}
// with names sorted.
inline Automaton observer_to_automaton(const Observer& o) {
    std::vector<std::string> states;
    for (size_t i = 0; i < o.estimates.size(); ++i) {
        std::string tok = "{";
        auto names = o.estimate_names(static_cast<int>(i));
        for (size_t j = 0; j < names.size(); ++j) {
            if (j) tok += '|';
            tok += names[j];
        }
        tok += '}';
        states.push_back(std::move(tok));
    }
    std::vector<Automaton::Transition> transitions;
    for (size_t i = 0; i < o.estimates.size(); ++i)
        for (size_t k = 0; k < o.alphabet.size(); ++k)
            if (o.delta[i][k] >= 0)
                transitions.push_back({states[i], o.alphabet[k], states[o.delta[i][k]]});
    return Automaton("obs(" + o.source_name + ")", states, o.alphabet, {states[o.initial]},
                     transitions);
}

} // namespace opaquer
