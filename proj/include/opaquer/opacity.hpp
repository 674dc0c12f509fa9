// opaquer: opacity verification on a single automaton.
//
// Current-state opacity: no observation may pin the system inside the secret
// set. Initial-state opacity: everything observable from a secret start must
// also be observable from a non-secret start. Both reduce to questions on
// observers; bounded brute-force variants double as independent oracles.
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
#include "opaquer/observer.hpp"

namespace opaquer {

enum class Outcome { Opaque, NotOpaque, Unknown };

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::Opaque: return "opaque";
        case Outcome::NotOpaque: return "not-opaque";
        case Outcome::Unknown: return "unknown";
    }
    return "?";
}

// Which local component certifies opacity. For the whole-secret rules a single
// component index; for the per-block rules one component per secret block.
// Indices are 1-based in serialized form.
struct Certificate {
    bool per_block = false;
    std::vector<std::pair<int, int>> entries;  // (block j, component i), 1-based

    bool operator==(const Certificate&) const = default;
};

struct Assumption1Violation {
    std::string event;
    std::string component_a, component_b;
    bool operator==(const Assumption1Violation&) const = default;
};

struct Verdict {
    Outcome outcome = Outcome::Unknown;
    std::string method;
    std::optional<Word> witness;  // an observation demonstrating NotOpaque
    std::optional<Certificate> certificate;
    std::optional<std::vector<Assumption1Violation>> assumption1;  // set when checked
};

// Where ISO covering runs may start: non-secret initial states, or any
// non-secret state.
enum class IsoWitnessStart { Initial, Any };

namespace detail {

inline std::vector<int> secret_indices(const Automaton& a, const std::vector<std::string>& secret,
                                       const char* who) {
    std::set<int> uniq;
    for (const auto& s : secret) {
        int i = a.state_index(s);
        if (i < 0) throw ModelError(std::string(who) + ": unknown secret state '" + s + "'");
        uniq.insert(i);
    }
    return {uniq.begin(), uniq.end()};
}

inline bool subset_of(const std::vector<int>& inner, const std::vector<int>& outer) {
    return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

inline bool intersects(const std::vector<int>& a, const std::vector<int>& b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) ++i;
        else if (*j < *i) ++j;
        else return true;
    }
    return false;
}

// Breadth-first search over observer estimates for the first estimate
// satisfying `bad`; returns its observation (shortest, events tried in name
// order so ties break lexicographically).
template <typename Pred>
inline std::optional<Word> find_revealing_observation(const Observer& o, Pred bad) {
    std::vector<std::pair<int, int>> parent(o.estimates.size(), {-1, -1});
    std::vector<char> seen(o.estimates.size(), 0);
    std::queue<int> queue;
    seen[o.initial] = 1;
    queue.push(o.initial);
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop();
        if (bad(o.estimates[cur])) {
            Word w;
            int at = cur;
            while (parent[at].first >= 0) {
                w.push_back(o.alphabet[parent[at].second]);
                at = parent[at].first;
            }
            std::reverse(w.begin(), w.end());
            return w;
        }
        for (size_t k = 0; k < o.alphabet.size(); ++k) {
            int next = o.delta[cur][k];
            if (next >= 0 && !seen[next]) {
                seen[next] = 1;
                parent[next] = {cur, static_cast<int>(k)};
                queue.push(next);
            }
        }
    }
    return std::nullopt;
}

} // namespace detail

// Current-state opacity: every generated word that can end in the secret has
// an observation-equivalent word ending outside it. Equivalently no reachable
// estimate is a nonempty subset of the secret. NotOpaque comes with the
// shortest revealing observation.
inline Verdict verify_cso(const Automaton& a, const ObservationMask& mask,
                          const std::vector<std::string>& secret,
                          std::uint64_t cap = kDefaultEstimateCap) {
    std::vector<int> s = detail::secret_indices(a, secret, "verify_cso");
    Verdict v;
    v.method = "monolithic-cso";
    Observer o = build_observer(a, mask, std::nullopt, cap);
    auto witness = detail::find_revealing_observation(
        o, [&](const std::vector<int>& est) { return detail::subset_of(est, s); });
    if (witness) {
        v.outcome = Outcome::NotOpaque;
        v.witness = std::move(*witness);
    } else {
        v.outcome = Outcome::Opaque;
    }
    return v;
}

// Initial-state opacity: the observed language from the secret initial states
// must be included in the observed language from the allowed covering starts.
// Secret states must be initial. NotOpaque yields the shortest observation
// seen from the secret but from no covering start.
inline Verdict verify_iso(const Automaton& a, const ObservationMask& mask,
                          const std::vector<std::string>& secret,
                          IsoWitnessStart start = IsoWitnessStart::Initial,
                          std::uint64_t cap = kDefaultEstimateCap) {
    std::vector<int> s = detail::secret_indices(a, secret, "verify_iso");
    for (int i : s)
        if (!a.is_initial(i))
            throw ModelError("verify_iso: secret state '" + a.states()[i] + "' is not initial");
    Verdict v;
    v.method = "monolithic-iso";
    if (s.empty()) {
        v.outcome = Outcome::Opaque;
        return v;
    }
    std::vector<std::string> covers;
    const auto& pool = start == IsoWitnessStart::Initial
                           ? a.initial_states()
                           : a.states();
    for (const auto& name : pool)
        if (!std::binary_search(s.begin(), s.end(), a.state_index(name))) covers.push_back(name);
    if (covers.empty()) {
        // The empty word is generated from every secret start and can never be
        // covered.
        v.outcome = Outcome::NotOpaque;
        v.witness = Word{};
        return v;
    }
    std::vector<std::string> secret_names;
    for (int i : s) secret_names.push_back(a.states()[i]);
    Observer from_secret = build_observer(a, mask, secret_names, cap);
    Observer from_covers = build_observer(a, mask, covers, cap);
    InclusionResult inc = observed_language_included(from_secret, from_covers);
    if (inc.holds) {
        v.outcome = Outcome::Opaque;
    } else {
        v.outcome = Outcome::NotOpaque;
        v.witness = std::move(inc.counterexample);
    }
    return v;
}

struct ConditionResult {
    bool holds = true;
    Word violation;  // meaningful when !holds
};

// Per-block sufficient condition for current-state opacity: every estimate
// that can contain a state of `block_secret` must also reach outside
// `full_secret`. `block_secret` and `full_secret` are sets of this
// automaton's states (projections of a global secret block / secret).
inline ConditionResult check_cso_subset_condition(const Automaton& a, const ObservationMask& mask,
                                                  const std::vector<std::string>& block_secret,
                                                  const std::vector<std::string>& full_secret,
                                                  std::uint64_t cap = kDefaultEstimateCap) {
    std::vector<int> sj = detail::secret_indices(a, block_secret, "check_cso_subset_condition");
    std::vector<int> s = detail::secret_indices(a, full_secret, "check_cso_subset_condition");
    if (sj.empty()) return {};
    Observer o = build_observer(a, mask, std::nullopt, cap);
    auto witness = detail::find_revealing_observation(o, [&](const std::vector<int>& est) {
        return detail::intersects(est, sj) && detail::subset_of(est, s);
    });
    if (!witness) return {};
    return {false, std::move(*witness)};
}

// Per-block sufficient condition for initial-state opacity: everything
// observable from the block's secret states is observable from the allowed
// non-secret starts (initial ones by default). Block states must be initial.
inline ConditionResult check_iso_subset_condition(const Automaton& a, const ObservationMask& mask,
                                                  const std::vector<std::string>& block_secret,
                                                  const std::vector<std::string>& full_secret,
                                                  IsoWitnessStart start = IsoWitnessStart::Initial,
                                                  std::uint64_t cap = kDefaultEstimateCap) {
    std::vector<int> sj = detail::secret_indices(a, block_secret, "check_iso_subset_condition");
    std::vector<int> s = detail::secret_indices(a, full_secret, "check_iso_subset_condition");
    for (int i : sj)
        if (!a.is_initial(i))
            throw ModelError("check_iso_subset_condition: secret state '" + a.states()[i] +
                             "' is not initial");
    if (sj.empty()) return {};
    std::vector<std::string> covers;
    const auto& pool = start == IsoWitnessStart::Initial ? a.initial_states() : a.states();
    for (const auto& name : pool)
        if (!std::binary_search(s.begin(), s.end(), a.state_index(name))) covers.push_back(name);
    if (covers.empty()) return {false, Word{}};
    std::vector<std::string> block_names;
    for (int i : sj) block_names.push_back(a.states()[i]);
    Observer lhs = build_observer(a, mask, block_names, cap);
    Observer rhs = build_observer(a, mask, covers, cap);
    InclusionResult inc = observed_language_included(lhs, rhs);
    if (inc.holds) return {};
    return {false, std::move(inc.counterexample)};
}

namespace detail {

// Exact check whether some run from `starts` produces observation w, with an
// end state outside `avoid` (empty = any end). Plain reachability over
// (state, consumed-observation) pairs; deliberately ignorant of observers.
inline bool observation_realizable(const Automaton& a, const std::vector<int>& starts,
                                   const std::vector<int>& w_events, const ObservationMask& mask,
                                   const std::vector<int>& avoid) {
    const int positions = static_cast<int>(w_events.size()) + 1;
    std::vector<char> seen(static_cast<size_t>(a.num_states()) * positions, 0);
    std::vector<int> stack;
    for (int s : starts) {
        int k = s * positions;
        if (!seen[k]) {
            seen[k] = 1;
            stack.push_back(k);
        }
    }
    while (!stack.empty()) {
        int k = stack.back();
        stack.pop_back();
        int state = k / positions, pos = k % positions;
        if (pos == static_cast<int>(w_events.size()) &&
            !std::binary_search(avoid.begin(), avoid.end(), state))
            return true;
        for (int e = 0; e < a.num_events(); ++e) {
            int t = a.step_index(state, e);
            if (t < 0) continue;
            int npos = pos;
            if (mask.observes(a.alphabet()[e])) {
                if (pos >= static_cast<int>(w_events.size()) || e != w_events[pos]) continue;
                npos = pos + 1;
            }
            int nk = t * positions + npos;
            if (!seen[nk]) {
                seen[nk] = 1;
                stack.push_back(nk);
            }
        }
    }
    return false;
}

} // namespace detail

// Brute-force current-state opacity oracle. Enumerates runs up to `maxlen`,
// collects the observations of secret-ending runs and checks each for a
// non-secret cover; the cover check is exact (any run length), so a reported
// violation is always real. Runs longer than maxlen stay unexplored, hence
// Unknown instead of Opaque.
inline Verdict brute_force_cso(const Automaton& a, const ObservationMask& mask,
                               const std::vector<std::string>& secret, int maxlen,
                               std::uint64_t cap = kDefaultEnumerationCap) {
    std::vector<int> s = detail::secret_indices(a, secret, "brute_force_cso");
    Verdict v;
    v.method = "bruteforce-cso";
    std::set<Word> candidates;
    for (const auto& rec : enumerate_words(a, maxlen, cap))
        if (std::binary_search(s.begin(), s.end(), a.state_index(rec.end)))
            candidates.insert(obs_project(rec.word, mask));
    std::vector<Word> ordered(candidates.begin(), candidates.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const Word& l, const Word& r) { return l.size() < r.size(); });
    for (const auto& w : ordered) {
        std::vector<int> we;
        for (const auto& e : w) we.push_back(a.event_index(e));
        if (!detail::observation_realizable(a, a.initial_indices(), we, mask, s)) {
            v.outcome = Outcome::NotOpaque;
            v.witness = w;
            return v;
        }
    }
    v.outcome = Outcome::Unknown;
    return v;
}

// Brute-force initial-state opacity oracle, same regime: observations of runs
// from secret starts up to maxlen, exact cover check from the allowed
// non-secret starts. Never returns Opaque.
inline Verdict brute_force_iso(const Automaton& a, const ObservationMask& mask,
                               const std::vector<std::string>& secret, int maxlen,
                               IsoWitnessStart start = IsoWitnessStart::Initial,
                               std::uint64_t cap = kDefaultEnumerationCap) {
    std::vector<int> s = detail::secret_indices(a, secret, "brute_force_iso");
    for (int i : s)
        if (!a.is_initial(i))
            throw ModelError("brute_force_iso: secret state '" + a.states()[i] + "' is not initial");
    Verdict v;
    v.method = "bruteforce-iso";
    if (s.empty()) {
        v.outcome = Outcome::Unknown;
        return v;
    }
    std::vector<int> covers;
    for (int i = 0; i < a.num_states(); ++i) {
        bool in_pool = start == IsoWitnessStart::Any || a.is_initial(i);
        if (in_pool && !std::binary_search(s.begin(), s.end(), i)) covers.push_back(i);
    }
    std::set<Word> candidates;
    for (const auto& rec : enumerate_words(a, maxlen, cap))
        if (std::binary_search(s.begin(), s.end(), a.state_index(rec.start)))
            candidates.insert(obs_project(rec.word, mask));
    std::vector<Word> ordered(candidates.begin(), candidates.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const Word& l, const Word& r) { return l.size() < r.size(); });
    for (const auto& w : ordered) {
        std::vector<int> we;
        for (const auto& e : w) we.push_back(a.event_index(e));
        if (covers.empty() || !detail::observation_realizable(a, covers, we, mask, {})) {
            v.outcome = Outcome::NotOpaque;
            v.witness = w;
            return v;
        }
    }
    v.outcome = Outcome::Unknown;
    return v;
}

} // namespace opaquer
