// opaquer: the textual model format and the verdict line protocol.
//
// A model file is a sequence of blocks separated by arbitrary blank lines;
// '#' starts a comment anywhere. Grammar (tokens are whitespace-separated):
//
//   automaton <name>
//   states <tok>...
//   initial <tok>...
//   alphabet <tok>...
//   trans <src> <event> <dst>      (zero or more)
//   end
//
//   system                          (at most one)
//   component <automaton-name>      (one or more)
//   observable <event>... | unobservable <event>...   (exactly one line;
//                                    the other set is the complement)
//   end
//
//   secret cso|iso                  (at most one, requires a system block)
//   block                           (optional; starts a new secret block)
//   state <s1>,<s2>,...,<sn>        (one composed-state tuple)
//   product <set1>;<set2>;...;<setn>  (each <set> is {a|b|c})
//   end
//
// Event names must not contain ',' or ';'. Composed states serialize as
// comma-joined component tokens, so component state tokens should be
// comma-free when they appear in secrets.
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "opaquer/automaton.hpp"
#include "opaquer/errors.hpp"
#include "opaquer/local.hpp"
#include "opaquer/opacity.hpp"

namespace opaquer {

struct SystemDecl {
    std::vector<std::string> component_names;
    ObservationMask mask;

    bool operator==(const SystemDecl&) const = default;
};

struct ModelDocument {
    std::vector<Automaton> automata;
    std::optional<SystemDecl> system;
    std::optional<GlobalSecret> secret;

    const Automaton& automaton(const std::string& name) const {
        for (const auto& a : automata)
            if (a.name() == name) return a;
        throw ModelError("no automaton named '" + name + "'");
    }

    ModularSystem to_system() const {
        if (!system) throw ModelError("document has no system block");
        ModularSystem sys;
        for (const auto& n : system->component_names) sys.components.push_back(automaton(n));
        sys.mask = system->mask;
        return sys;
    }

    bool operator==(const ModelDocument&) const = default;
};

namespace detail {

[[noreturn]] inline void parse_fail(int line, const std::string& msg) {
    throw ModelError("line " + std::to_string(line) + ": " + msg);
}

inline std::vector<std::string> split_on(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline void check_event_token(const std::string& tok, int line) {
    if (tok.find(',') != std::string::npos || tok.find(';') != std::string::npos)
        parse_fail(line, "event name '" + tok + "' contains ',' or ';'");
}

} // namespace detail

inline ModelDocument parse_model(const std::string& text) {
    ModelDocument doc;

    struct Line {
        int number;
        std::vector<std::string> tokens;
    };
    std::vector<Line> lines;
    {
        std::istringstream in(text);
        std::string raw;
        int number = 0;
        while (std::getline(in, raw)) {
            ++number;
            if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
            std::istringstream ls(raw);
            Line line{number, {}};
            std::string tok;
            while (ls >> tok) line.tokens.push_back(tok);
            if (!line.tokens.empty()) lines.push_back(std::move(line));
        }
    }

    struct PendingName {
        std::string name;
        int line;
    };
    std::vector<PendingName> component_refs;
    int mask_line = 0;
    std::vector<std::string> mask_events;
    bool mask_lists_observable = false;
    bool have_system = false;

    struct PendingItem {
        SecretItem item;
        int line;
    };
    std::vector<std::vector<PendingItem>> secret_groups;
    bool secret_has_blocks = false;
    bool have_secret = false;
    SecretKind secret_kind = SecretKind::CurrentState;
    int secret_line = 0;

    size_t at = 0;
    auto more = [&] { return at < lines.size(); };
    while (more()) {
        const Line& head = lines[at];
        const std::string& kw = head.tokens[0];
        if (kw == "automaton") {
            if (head.tokens.size() != 2) detail::parse_fail(head.number, "expected: automaton <name>");
            std::string name = head.tokens[1];
            ++at;
            auto expect = [&](const char* what) -> const Line& {
                if (!more()) detail::parse_fail(lines.back().number, std::string("automaton '") + name + "': missing " + what);
                return lines[at];
            };
            const Line& st = expect("states line");
            if (st.tokens[0] != "states" || st.tokens.size() < 2)
                detail::parse_fail(st.number, "expected: states <tok>...");
            std::vector<std::string> states(st.tokens.begin() + 1, st.tokens.end());
            std::set<std::string> state_set;
            for (const auto& s : states)
                if (!state_set.insert(s).second)
                    detail::parse_fail(st.number, "duplicate state '" + s + "'");
            ++at;
            const Line& in = expect("initial line");
            if (in.tokens[0] != "initial" || in.tokens.size() < 2)
                detail::parse_fail(in.number, "expected: initial <tok>...");
            std::vector<std::string> initial(in.tokens.begin() + 1, in.tokens.end());
            std::set<std::string> initial_set;
            for (const auto& s : initial) {
                if (!state_set.count(s))
                    detail::parse_fail(in.number, "initial state '" + s + "' not declared");
                if (!initial_set.insert(s).second)
                    detail::parse_fail(in.number, "duplicate initial state '" + s + "'");
            }
            ++at;
            const Line& al = expect("alphabet line");
            if (al.tokens[0] != "alphabet" || al.tokens.size() < 2)
                detail::parse_fail(al.number, "expected: alphabet <event>...");
            std::vector<std::string> alphabet(al.tokens.begin() + 1, al.tokens.end());
            std::set<std::string> event_set;
            for (const auto& e : alphabet) {
                detail::check_event_token(e, al.number);
                if (!event_set.insert(e).second)
                    detail::parse_fail(al.number, "duplicate event '" + e + "'");
            }
            ++at;
            std::vector<Automaton::Transition> transitions;
            std::set<std::pair<std::string, std::string>> seen_edges;
            while (more() && lines[at].tokens[0] == "trans") {
                const Line& tr = lines[at];
                if (tr.tokens.size() != 4)
                    detail::parse_fail(tr.number, "expected: trans <src> <event> <dst>");
                if (!state_set.count(tr.tokens[1]))
                    detail::parse_fail(tr.number, "undeclared state '" + tr.tokens[1] + "'");
                if (!event_set.count(tr.tokens[2]))
                    detail::parse_fail(tr.number, "undeclared event '" + tr.tokens[2] + "'");
                if (!state_set.count(tr.tokens[3]))
                    detail::parse_fail(tr.number, "undeclared state '" + tr.tokens[3] + "'");
                if (!seen_edges.emplace(tr.tokens[1], tr.tokens[2]).second)
                    detail::parse_fail(tr.number, "duplicate transition from '" + tr.tokens[1] +
                                                      "' on '" + tr.tokens[2] + "'");
                transitions.push_back({tr.tokens[1], tr.tokens[2], tr.tokens[3]});
                ++at;
            }
            if (!more() || lines[at].tokens[0] != "end" || lines[at].tokens.size() != 1)
                detail::parse_fail(more() ? lines[at].number : lines.back().number,
                                   "automaton '" + name + "': expected end");
            ++at;
            for (const auto& a : doc.automata)
                if (a.name() == name)
                    detail::parse_fail(head.number, "duplicate automaton '" + name + "'");
            doc.automata.emplace_back(name, states, alphabet, initial, transitions);
        } else if (kw == "system") {
            if (head.tokens.size() != 1) detail::parse_fail(head.number, "expected: system");
            if (have_system) detail::parse_fail(head.number, "duplicate system block");
            have_system = true;
            ++at;
            while (more() && lines[at].tokens[0] == "component") {
                if (lines[at].tokens.size() != 2)
                    detail::parse_fail(lines[at].number, "expected: component <name>");
                component_refs.push_back({lines[at].tokens[1], lines[at].number});
                ++at;
            }
            if (component_refs.empty())
                detail::parse_fail(more() ? lines[at].number : lines.back().number,
                                   "system: at least one component required");
            if (!more() ||
                (lines[at].tokens[0] != "observable" && lines[at].tokens[0] != "unobservable"))
                detail::parse_fail(more() ? lines[at].number : lines.back().number,
                                   "system: expected observable or unobservable line");
            mask_lists_observable = lines[at].tokens[0] == "observable";
            mask_line = lines[at].number;
            mask_events.assign(lines[at].tokens.begin() + 1, lines[at].tokens.end());
            ++at;
            if (!more() || lines[at].tokens[0] != "end" || lines[at].tokens.size() != 1)
                detail::parse_fail(more() ? lines[at].number : lines.back().number,
                                   "system: expected end");
            ++at;
        } else if (kw == "secret") {
            if (head.tokens.size() != 2 ||
                (head.tokens[1] != "cso" && head.tokens[1] != "iso"))
                detail::parse_fail(head.number, "expected: secret cso|iso");
            if (have_secret) detail::parse_fail(head.number, "duplicate secret block");
            have_secret = true;
            secret_line = head.number;
            secret_kind =
                head.tokens[1] == "cso" ? SecretKind::CurrentState : SecretKind::InitialState;
            ++at;
            secret_groups.emplace_back();
            while (more() && lines[at].tokens[0] != "end") {
                const Line& ln = lines[at];
                if (ln.tokens[0] == "block") {
                    if (ln.tokens.size() != 1) detail::parse_fail(ln.number, "expected: block");
                    if (!secret_has_blocks) {
                        if (!secret_groups.back().empty())
                            detail::parse_fail(ln.number,
                                               "secret items before the first block line");
                        secret_has_blocks = true;
                        secret_groups.clear();
                    }
                    secret_groups.emplace_back();
                } else if (ln.tokens[0] == "state") {
                    if (ln.tokens.size() != 2)
                        detail::parse_fail(ln.number, "expected: state <s1>,<s2>,...");
                    SecretItem item;
                    item.tuple = detail::split_on(ln.tokens[1], ',');
                    for (const auto& p : item.tuple)
                        if (p.empty()) detail::parse_fail(ln.number, "empty tuple component");
                    secret_groups.back().push_back({std::move(item), ln.number});
                } else if (ln.tokens[0] == "product") {
                    if (ln.tokens.size() != 2)
                        detail::parse_fail(ln.number, "expected: product {..};{..};...");
                    SecretItem item;
                    for (const auto& factor : detail::split_on(ln.tokens[1], ';')) {
                        if (factor.size() < 2 || factor.front() != '{' || factor.back() != '}')
                            detail::parse_fail(ln.number, "product factor '" + factor +
                                                              "' is not of the form {a|b}");
                        std::string inner = factor.substr(1, factor.size() - 2);
                        if (inner.empty()) detail::parse_fail(ln.number, "empty product factor");
                        item.product.push_back(detail::split_on(inner, '|'));
                        for (const auto& s : item.product.back())
                            if (s.empty()) detail::parse_fail(ln.number, "empty state in product");
                    }
                    secret_groups.back().push_back({std::move(item), ln.number});
                } else {
                    detail::parse_fail(ln.number, "unknown secret directive '" + ln.tokens[0] + "'");
                }
                ++at;
            }
            if (!more()) detail::parse_fail(lines.back().number, "secret: expected end");
            ++at;
        } else {
            detail::parse_fail(head.number, "unknown directive '" + kw + "'");
        }
    }

    // Cross-block resolution with the recorded line numbers.
    if (have_system) {
        SystemDecl decl;
        std::set<std::string> union_alphabet;
        std::set<std::string> seen_components;
        for (const auto& ref : component_refs) {
            bool found = false;
            for (const auto& a : doc.automata)
                if (a.name() == ref.name) {
                    found = true;
                    union_alphabet.insert(a.alphabet().begin(), a.alphabet().end());
                }
            if (!found) detail::parse_fail(ref.line, "unknown component '" + ref.name + "'");
            if (!seen_components.insert(ref.name).second)
                detail::parse_fail(ref.line, "duplicate component '" + ref.name + "'");
            decl.component_names.push_back(ref.name);
        }
        std::set<std::string> listed;
        for (const auto& e : mask_events) {
            detail::check_event_token(e, mask_line);
            if (!union_alphabet.count(e))
                detail::parse_fail(mask_line, "event '" + e + "' not in any component alphabet");
            listed.insert(e);
        }
        if (mask_lists_observable) {
            decl.mask.observable = listed;
        } else {
            for (const auto& e : union_alphabet)
                if (!listed.count(e)) decl.mask.observable.insert(e);
        }
        doc.system = std::move(decl);
    }
    if (have_secret) {
        if (!doc.system) detail::parse_fail(secret_line, "secret requires a system block");
        GlobalSecret secret;
        secret.kind = secret_kind;
        secret.has_blocks = secret_has_blocks;
        ModularSystem sys = doc.to_system();
        const size_t n = sys.components.size();
        for (const auto& group : secret_groups) {
            SecretGroup g;
            for (const auto& pending : group) {
                if (pending.item.arity() != n)
                    detail::parse_fail(pending.line,
                                       "tuple arity " + std::to_string(pending.item.arity()) +
                                           " does not match " + std::to_string(n) + " components");
                GlobalSecret probe;
                probe.kind = secret_kind;
                probe.groups.push_back({{pending.item}});
                try {
                    validate_secret(sys, probe);
                } catch (const ModelError& e) {
                    detail::parse_fail(pending.line, e.what());
                }
                g.items.push_back(pending.item);
            }
            if (!g.items.empty() || !secret_has_blocks) secret.groups.push_back(std::move(g));
        }
        if (secret.groups.empty()) secret.groups.emplace_back();
        doc.secret = std::move(secret);
    }
    return doc;
}

inline std::string serialize_automaton(const Automaton& a) {
    std::ostringstream out;
    out << "automaton " << a.name() << "\n";
    out << "states";
    for (const auto& s : a.states()) out << ' ' << s;
    out << "\ninitial";
    for (const auto& s : a.initial_states()) out << ' ' << s;
    out << "\nalphabet";
    for (const auto& e : a.alphabet()) out << ' ' << e;
    out << '\n';
    for (const auto& t : a.transitions())
        out << "trans " << t.from << ' ' << t.event << ' ' << t.to << "\n";
    out << "end\n";
    return out.str();
}

// Canonical text form; parse(serialize(doc)) == doc for valid documents. The
// mask always serializes as the unobservable complement, sorted.
inline std::string serialize_model(const ModelDocument& doc) {
    std::ostringstream out;
    for (const auto& a : doc.automata) out << serialize_automaton(a) << "\n";
    if (doc.system) {
        out << "system\n";
        for (const auto& n : doc.system->component_names) out << "component " << n << "\n";
        std::set<std::string> unobservable;
        for (const auto& n : doc.system->component_names)
            for (const auto& e : doc.automaton(n).alphabet())
                if (!doc.system->mask.observes(e)) unobservable.insert(e);
        out << "unobservable";
        for (const auto& e : unobservable) out << ' ' << e;
        out << "\nend\n";
    }
    if (doc.secret) {
        out << "\nsecret "
            << (doc.secret->kind == SecretKind::CurrentState ? "cso" : "iso") << "\n";
        for (const auto& g : doc.secret->groups) {
            if (doc.secret->has_blocks) out << "block\n";
            for (const auto& item : g.items) {
                if (item.is_product()) {
                    out << "product ";
                    for (size_t i = 0; i < item.product.size(); ++i) {
                        if (i) out << ';';
                        out << '{';
                        for (size_t j = 0; j < item.product[i].size(); ++j) {
                            if (j) out << '|';
                            out << item.product[i][j];
                        }
                        out << '}';
                    }
                    out << "\n";
                } else {
                    out << "state " << join_state_tuple(item.tuple) << "\n";
                }
            }
        }
        out << "end\n";
    }
    return out.str();
}

// Verdict line protocol:
//   verdict: opaque|not-opaque|unknown
//   method: <descriptor>
//   witness: <space-joined events>        (only for not-opaque; empty word: -)
//   certificate: i=2 | j=1 i=1; j=2 i=2   (only for certified opaque)
//   assumption1: ok | violated <events>   (only when the check ran)
inline std::string serialize_verdict(const Verdict& v) {
    std::ostringstream out;
    out << "verdict: " << to_string(v.outcome) << "\n";
    out << "method: " << v.method << "\n";
    if (v.witness) {
        out << "witness: ";
        out << (v.witness->empty() ? "-" : join_word(*v.witness));
        out << "\n";
    }
    if (v.certificate) {
        out << "certificate: ";
        if (!v.certificate->per_block) {
            out << "i=" << v.certificate->entries.at(0).second;
        } else {
            for (size_t k = 0; k < v.certificate->entries.size(); ++k) {
                if (k) out << "; ";
                out << "j=" << v.certificate->entries[k].first
                    << " i=" << v.certificate->entries[k].second;
            }
        }
        out << "\n";
    }
    if (v.assumption1) {
        if (v.assumption1->empty()) {
            out << "assumption1: ok\n";
        } else {
            out << "assumption1: violated";
            for (const auto& viol : *v.assumption1) out << ' ' << viol.event;
            out << "\n";
        }
    }
    return out.str();
}

inline int exit_code_for(const Verdict& v) {
    switch (v.outcome) {
        case Outcome::Opaque: return 0;
        case Outcome::NotOpaque: return 1;
        case Outcome::Unknown: return 2;
    }
    return 2;
}

// Word files: whitespace-separated event names, '#' comments, empty = epsilon.
inline Word parse_word_file(const std::string& text) {
    Word out;
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::string tok;
        while (ls >> tok) out.push_back(tok);
    }
    return out;
}

} // namespace opaquer
