// opaquer: deterministic partial automata with multiple initial states,
// plus words, projections and bounded run enumeration.
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "opaquer/errors.hpp"

namespace opaquer {

using Word = std::vector<std::string>;

inline std::string join_word(const Word& w, const std::string& sep = " ") {
    std::string out;
    for (size_t i = 0; i < w.size(); ++i) {
        if (i) out += sep;
        out += w[i];
    }
    return out;
}

// Partition of event names into observable and unobservable. Only membership
// in `observable` matters; events outside the set are unobservable.
struct ObservationMask {
    std::set<std::string> observable;

    bool observes(const std::string& event) const { return observable.count(event) != 0; }

    // Mask restricted to one component's alphabet.
    ObservationMask restricted_to(const std::vector<std::string>& alphabet) const {
        ObservationMask m;
        for (const auto& e : alphabet)
            if (observes(e)) m.observable.insert(e);
        return m;
    }

    bool operator==(const ObservationMask&) const = default;
};

// A deterministic automaton with a partial transition function and a set of
// initial states. States and events are opaque tokens; indices are stable
// and follow declaration order. Immutable after construction.
class Automaton {
public:
    struct Transition {
        std::string from, event, to;
        bool operator==(const Transition&) const = default;
    };

    Automaton() = default;

    Automaton(std::string name, std::vector<std::string> states,
              std::vector<std::string> alphabet, std::vector<std::string> initial,
              const std::vector<Transition>& transitions)
        : name_(std::move(name)), states_(std::move(states)), alphabet_(std::move(alphabet)) {
        if (states_.empty()) throw ModelError("automaton '" + name_ + "': no states declared");
        for (size_t i = 0; i < states_.size(); ++i) {
            if (!state_index_.emplace(states_[i], static_cast<int>(i)).second)
                throw ModelError("automaton '" + name_ + "': duplicate state '" + states_[i] + "'");
        }
        for (size_t i = 0; i < alphabet_.size(); ++i) {
            if (!event_index_.emplace(alphabet_[i], static_cast<int>(i)).second)
                throw ModelError("automaton '" + name_ + "': duplicate event '" + alphabet_[i] + "'");
        }
        if (initial.empty()) throw ModelError("automaton '" + name_ + "': no initial states");
        std::set<int> init;
        for (const auto& s : initial) {
            int idx = state_index(s);
            if (idx < 0)
                throw ModelError("automaton '" + name_ + "': initial state '" + s + "' not declared");
            if (!init.insert(idx).second)
                throw ModelError("automaton '" + name_ + "': duplicate initial state '" + s + "'");
        }
        initial_.assign(init.begin(), init.end());
        delta_.assign(states_.size(), std::vector<int>(alphabet_.size(), -1));
        for (const auto& t : transitions) {
            int s = state_index(t.from), e = event_index(t.event), d = state_index(t.to);
            if (s < 0) throw ModelError("automaton '" + name_ + "': transition from undeclared state '" + t.from + "'");
            if (e < 0) throw ModelError("automaton '" + name_ + "': transition on undeclared event '" + t.event + "'");
            if (d < 0) throw ModelError("automaton '" + name_ + "': transition to undeclared state '" + t.to + "'");
            if (delta_[s][e] != -1 && delta_[s][e] != d)
                throw ModelError("automaton '" + name_ + "': conflicting transitions from '" + t.from +
                                 "' on '" + t.event + "'");
            delta_[s][e] = d;
        }
    }

    const std::string& name() const { return name_; }
    const std::vector<std::string>& states() const { return states_; }
    const std::vector<std::string>& alphabet() const { return alphabet_; }
    const std::vector<int>& initial_indices() const { return initial_; }

    std::vector<std::string> initial_states() const {
        std::vector<std::string> out;
        for (int i : initial_) out.push_back(states_[i]);
        return out;
    }

    int num_states() const { return static_cast<int>(states_.size()); }
    int num_events() const { return static_cast<int>(alphabet_.size()); }

    int state_index(const std::string& s) const {
        auto it = state_index_.find(s);
        return it == state_index_.end() ? -1 : it->second;
    }
    int event_index(const std::string& e) const {
        auto it = event_index_.find(e);
        return it == event_index_.end() ? -1 : it->second;
    }
    bool has_event(const std::string& e) const { return event_index(e) >= 0; }

    bool is_initial(int state) const {
        return std::binary_search(initial_.begin(), initial_.end(), state);
    }
    bool is_initial(const std::string& state) const { return is_initial(state_index(state)); }

    // delta(state, event) by index; -1 when undefined.
    int step_index(int state, int event) const { return delta_[state][event]; }

    std::optional<std::string> step(const std::string& state, const std::string& event) const {
        int s = state_index(state);
        if (s < 0) throw ModelError("automaton '" + name_ + "': unknown state '" + state + "'");
        int e = event_index(event);
        if (e < 0) throw ModelError("automaton '" + name_ + "': unknown event '" + event + "'");
        int d = delta_[s][e];
        if (d < 0) return std::nullopt;
        return states_[d];
    }

    // Extended transition function: fold of step over w, undefined as soon as
    // one step is undefined. Undeclared events in w are an input error even
    // past the point where the run dies.
    std::optional<std::string> run(const std::string& state, const Word& w) const {
        int s = state_index(state);
        if (s < 0) throw ModelError("automaton '" + name_ + "': unknown state '" + state + "'");
        std::vector<int> ev;
        ev.reserve(w.size());
        for (const auto& e : w) {
            int idx = event_index(e);
            if (idx < 0) throw ModelError("automaton '" + name_ + "': unknown event '" + e + "'");
            ev.push_back(idx);
        }
        for (int e : ev) {
            s = delta_[s][e];
            if (s < 0) return std::nullopt;
        }
        return states_[s];
    }

    int run_index(int state, const std::vector<int>& events) const {
        int s = state;
        for (int e : events) {
            if (s < 0) return -1;
            s = delta_[s][e];
        }
        return s;
    }

    // All transitions in (source state, event) declaration order.
    std::vector<Transition> transitions() const {
        std::vector<Transition> out;
        for (size_t s = 0; s < states_.size(); ++s)
            for (size_t e = 0; e < alphabet_.size(); ++e)
                if (delta_[s][e] >= 0)
                    out.push_back({states_[s], alphabet_[e], states_[delta_[s][e]]});
        return out;
    }

    bool operator==(const Automaton& other) const {
        return name_ == other.name_ && states_ == other.states_ && alphabet_ == other.alphabet_ &&
               initial_ == other.initial_ && delta_ == other.delta_;
    }

private:
    std::string name_;
    std::vector<std::string> states_;
    std::vector<std::string> alphabet_;
    std::unordered_map<std::string, int> state_index_;
    std::unordered_map<std::string, int> event_index_;
    std::vector<int> initial_;                // sorted state indices
    std::vector<std::vector<int>> delta_;     // delta_[state][event], -1 = undefined
};

// Erases events outside `alphabet`, keeping order.
inline Word natural_project(const Word& w, const std::set<std::string>& alphabet) {
    Word out;
    for (const auto& e : w)
        if (alphabet.count(e)) out.push_back(e);
    return out;
}

// What an observer sees of w: the observable events in order.
inline Word obs_project(const Word& w, const ObservationMask& mask) {
    return natural_project(w, mask.observable);
}

struct RunRecord {
    std::string start;
    Word word;
    std::string end;
    bool operator==(const RunRecord&) const = default;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

// Every defined run (start, word, end) with |word| <= maxlen, from every
// initial state, in (start, length, lexicographic word) order. Throws
// ResourceError once more than `cap` runs exist.
inline std::vector<RunRecord> enumerate_words(const Automaton& a, int maxlen,
                                              std::uint64_t cap = kDefaultEnumerationCap) {
    if (maxlen < 0) throw ModelError("enumerate_words: negative maxlen");
    // Event indices sorted by name so emitted words are in lexicographic order.
    std::vector<int> by_name(a.num_events());
    for (int i = 0; i < a.num_events(); ++i) by_name[i] = i;
    std::sort(by_name.begin(), by_name.end(),
              [&](int l, int r) { return a.alphabet()[l] < a.alphabet()[r]; });

    std::vector<RunRecord> out;
    std::vector<int> word;
    auto emit = [&](int start, int end) {
        if (out.size() >= cap)
            throw ResourceError("enumerate_words: more than " + std::to_string(cap) + " runs");
        Word w;
        for (int e : word) w.push_back(a.alphabet()[e]);
        out.push_back({a.states()[start], std::move(w), a.states()[end]});
    };
    for (int start : a.initial_indices()) {
        // Iterative deepening keeps the (length, lex) output order without a queue
        // of whole words.
        for (int len = 0; len <= maxlen; ++len) {
            auto dfs = [&](auto&& self, int state, int remaining) -> void {
                if (remaining == 0) {
                    emit(start, state);
                    return;
                }
                for (int e : by_name) {
                    int next = a.step_index(state, e);
                    if (next < 0) continue;
                    word.push_back(e);
                    self(self, next, remaining - 1);
                    word.pop_back();
                }
            };
            dfs(dfs, start, len);
        }
    }
    return out;
}

} // namespace opaquer
