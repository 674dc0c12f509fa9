#pragma once

// Shared test helpers: fixture loading plus brute-force oracles. The oracles
// are written against the plain automaton interface on purpose: they must not
// share code with the composition, observer, or estimation paths they check.

#include <opaquer/opaquer.hpp>

#include <cstdlib>
#include <deque>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace testsupport {

using namespace opaquer;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string models_dir() {
    if (const char* env = std::getenv("OPAQUER_MODELS")) return env;
    return "models";
}

inline ModelDocument load_fixture(const std::string& name) {
    return parse_model(read_file(models_dir() + "/" + name));
}

// One synchronous step of the component tuple: every holder of the event
// moves or the step is blocked; an event held by nobody is blocked too.
inline std::optional<std::vector<std::string>> oracle_step(const std::vector<Automaton>& comps,
                                                           const std::vector<std::string>& tuple,
                                                           const std::string& event) {
    std::vector<std::string> next = tuple;
    bool anyone = false;
    for (size_t i = 0; i < comps.size(); ++i) {
        if (!comps[i].has_event(event)) continue;
        anyone = true;
        auto to = comps[i].step(tuple[i], event);
        if (!to) return std::nullopt;
        next[i] = *to;
    }
    if (!anyone) return std::nullopt;
    return next;
}

// The right-hand side of the tuple-run equation: each component runs its own
// projection of the word independently, start to finish.
inline std::optional<std::vector<std::string>> oracle_projected_runs(
    const std::vector<Automaton>& comps, const std::vector<std::string>& tuple, const Word& w) {
    std::vector<std::string> out;
    for (size_t i = 0; i < comps.size(); ++i) {
        std::set<std::string> sigma(comps[i].alphabet().begin(), comps[i].alphabet().end());
        auto end = comps[i].run(tuple[i], natural_project(w, sigma));
        if (!end) return std::nullopt;
        out.push_back(*end);
    }
    return out;
}

// All initial tuples, odometer order.
inline std::vector<std::vector<std::string>> initial_tuples(const std::vector<Automaton>& comps) {
    std::vector<std::vector<std::string>> out{{}};
    for (const auto& c : comps) {
        std::vector<std::vector<std::string>> grown;
        for (const auto& prefix : out)
            for (const auto& s : c.initial_states()) {
                auto t = prefix;
                t.push_back(s);
                grown.push_back(std::move(t));
            }
        out = std::move(grown);
    }
    return out;
}

// Every state reachable from `init` by a run observed exactly as `obs`:
// breadth-first over (state, consumed prefix length) pairs. This is the
// estimate definition spelled out; no subset construction involved.
inline std::set<std::string> oracle_estimate(const Automaton& a,
                                             const std::vector<std::string>& init, const Word& obs,
                                             const ObservationMask& mask) {
    std::set<std::pair<std::string, size_t>> seen;
    std::deque<std::pair<std::string, size_t>> queue;
    for (const auto& s : init)
        if (seen.insert({s, 0}).second) queue.push_back({s, 0});
    std::set<std::string> out;
    while (!queue.empty()) {
        auto [x, k] = queue.front();
        queue.pop_front();
        if (k == obs.size()) out.insert(x);
        for (const auto& t : a.transitions()) {
            if (t.from != x) continue;
            size_t consumed = k;
            if (mask.observes(t.event)) {
                if (k == obs.size() || obs[k] != t.event) continue;
                consumed = k + 1;
            }
            if (seen.insert({t.to, consumed}).second) queue.push_back({t.to, consumed});
        }
    }
    return out;
}

// Subset construction redone from scratch with different containers and its
// own closure, for cross-checking observer state counts.
inline std::uint64_t oracle_observer_count(const Automaton& a, const ObservationMask& mask) {
    auto closure = [&](std::set<std::string> xs) {
        bool grew = true;
        while (grew) {
            grew = false;
            for (const auto& t : a.transitions())
                if (!mask.observes(t.event) && xs.count(t.from) && !xs.count(t.to)) {
                    xs.insert(t.to);
                    grew = true;
                }
        }
        return xs;
    };
    std::set<std::set<std::string>> seen;
    std::deque<std::set<std::string>> queue;
    auto starts = a.initial_states();
    auto init = closure({starts.begin(), starts.end()});
    seen.insert(init);
    queue.push_back(std::move(init));
    while (!queue.empty()) {
        auto est = queue.front();
        queue.pop_front();
        std::map<std::string, std::set<std::string>> next;
        for (const auto& t : a.transitions())
            if (mask.observes(t.event) && est.count(t.from)) next[t.event].insert(t.to);
        for (auto& [event, xs] : next) {
            auto c = closure(std::move(xs));
            if (!seen.count(c)) {
                seen.insert(c);
                queue.push_back(std::move(c));
            }
        }
    }
    return seen.size();
}

inline std::set<std::string> to_set(const std::vector<std::string>& v) {
    return {v.begin(), v.end()};
}

// Defined words of the composed graph, breadth-first from every initial
// tuple, capped. Uses only oracle_step, so it is independent of both the
// composition and the enumeration code in the library.
struct OracleRun {
    std::vector<std::string> start;
    Word word;
    std::vector<std::string> end;
};

inline std::vector<OracleRun> oracle_enumerate(const std::vector<Automaton>& comps, int maxlen,
                                               size_t cap) {
    std::set<std::string> events;
    for (const auto& c : comps) events.insert(c.alphabet().begin(), c.alphabet().end());
    std::vector<OracleRun> out;
    std::deque<OracleRun> queue;
    for (const auto& t : initial_tuples(comps)) queue.push_back({t, {}, t});
    while (!queue.empty() && out.size() < cap) {
        OracleRun r = std::move(queue.front());
        queue.pop_front();
        if (static_cast<int>(r.word.size()) > maxlen) break;
        out.push_back(r);
        if (static_cast<int>(r.word.size()) == maxlen) continue;
        for (const auto& e : events)
            if (auto next = oracle_step(comps, r.end, e)) {
                OracleRun grown = r;
                grown.word.push_back(e);
                grown.end = *next;
                queue.push_back(std::move(grown));
            }
    }
    return out;
}

}  // namespace testsupport
