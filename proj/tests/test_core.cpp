#include <catch2/catch_amalgamated.hpp>

#include "support/helpers.hpp"

using namespace opaquer;
using testsupport::load_fixture;
using testsupport::oracle_projected_runs;
using testsupport::oracle_step;
using testsupport::to_set;

namespace {

Automaton toy() {
    return Automaton("toy", {"p", "q", "r"}, {"a", "b"}, {"p"},
                     {{"p", "a", "q"}, {"q", "b", "r"}, {"p", "b", "p"}});
}

}  // namespace

TEST_CASE("steps follow declared transitions and nothing else") {
    Automaton a = toy();
    CHECK(a.step("p", "a") == "q");
    CHECK(a.step("p", "b") == "p");
    CHECK(a.step("q", "a") == std::nullopt);
    CHECK_THROWS_AS(a.step("missing", "a"), ModelError);
    CHECK_THROWS_AS(a.step("p", "zap"), ModelError);
}

TEST_CASE("runs fold steps and report blocked words as undefined") {
    Automaton a = toy();
    CHECK(a.run("p", {}) == "p");
    CHECK(a.run("p", {"b", "b", "a", "b"}) == "r");
    CHECK(a.run("p", {"a", "a"}) == std::nullopt);
    CHECK_THROWS_AS(a.run("p", {"a", "zap"}), ModelError);
}

TEST_CASE("construction rejects malformed automata") {
    CHECK_THROWS_AS(Automaton("x", {"s", "s"}, {"a"}, {"s"}, {}), ModelError);
    CHECK_THROWS_AS(Automaton("x", {"s"}, {"a", "a"}, {"s"}, {}), ModelError);
    CHECK_THROWS_AS(Automaton("x", {"s"}, {"a"}, {"t"}, {}), ModelError);
    CHECK_THROWS_AS(Automaton("x", {"s"}, {"a"}, {}, {}), ModelError);
    CHECK_THROWS_AS(Automaton("x", {"s"}, {"a"}, {"s"}, {{"s", "a", "t"}}), ModelError);
    CHECK_THROWS_AS(Automaton("x", {"s"}, {"a"}, {"s"}, {{"s", "c", "s"}}), ModelError);
    // two targets for one (state, event) pair
    CHECK_THROWS_AS(Automaton("x", {"s", "t"}, {"a"}, {"s"}, {{"s", "a", "s"}, {"s", "a", "t"}}),
                    ModelError);
}

TEST_CASE("projections erase exactly the foreign and hidden events") {
    Word w{"a", "x", "b", "x", "a"};
    CHECK(natural_project(w, {"a", "b"}) == Word{"a", "b", "a"});
    CHECK(natural_project(w, {"x"}) == Word{"x", "x"});
    CHECK(natural_project({}, {"a"}).empty());
    ObservationMask mask{{"a"}};
    CHECK(obs_project(w, mask) == Word{"a", "a"});
}

TEST_CASE("projection distributes over concatenation") {
    std::mt19937_64 rng(11);
    std::vector<std::string> events{"a", "b", "c", "d"};
    for (int t = 0; t < 100; ++t) {
        Word u, v;
        for (int k = detail::rand_int(rng, 0, 6); k > 0; --k)
            u.push_back(events[detail::rand_int(rng, 0, 3)]);
        for (int k = detail::rand_int(rng, 0, 6); k > 0; --k)
            v.push_back(events[detail::rand_int(rng, 0, 3)]);
        Word uv = u;
        uv.insert(uv.end(), v.begin(), v.end());
        std::set<std::string> keep{"a", "c"};
        Word lhs = natural_project(uv, keep);
        Word rhs = natural_project(u, keep);
        Word tail = natural_project(v, keep);
        rhs.insert(rhs.end(), tail.begin(), tail.end());
        CHECK(lhs == rhs);
    }
}

TEST_CASE("composition keeps only the accessible tuples") {
    ModelDocument doc = load_fixture("cso_shared_hidden.des");
    Automaton composed = compose_all(doc.to_system().components);
    CHECK(to_set(composed.states()) == std::set<std::string>{"a1,s2", "s1,s2"});
    CHECK(composed.initial_states() == std::vector<std::string>{"a1,s2"});
    REQUIRE(composed.transitions().size() == 1);
    CHECK(composed.transitions()[0] == Automaton::Transition{"a1,s2", "a", "s1,s2"});
    CHECK(to_set(composed.alphabet()) == std::set<std::string>{"a", "b"});
}

TEST_CASE("composition agrees with the direct product stepper") {
    for (std::uint64_t seed : {1, 4, 9, 16, 25, 36, 49, 64, 81, 100}) {
        GenParams p;
        p.seed = seed;
        p.min_components = 2;
        p.max_components = 3;
        ModelDocument doc = generate_system(p);
        auto comps = doc.to_system().components;
        Automaton composed = compose_all(comps);

        std::set<std::string> events;
        for (const auto& c : comps) events.insert(c.alphabet().begin(), c.alphabet().end());
        CHECK(to_set(composed.alphabet()) == events);

        // breadth-first over tuples, stepping components directly
        std::set<std::string> reached;
        std::deque<std::vector<std::string>> queue;
        for (const auto& t : testsupport::initial_tuples(comps)) {
            if (reached.insert(join_state_tuple(t)).second) queue.push_back(t);
        }
        size_t oracle_transitions = 0;
        while (!queue.empty()) {
            auto tuple = queue.front();
            queue.pop_front();
            for (const auto& e : events) {
                auto next = oracle_step(comps, tuple, e);
                auto composed_next = composed.step(join_state_tuple(tuple), e);
                if (!next) {
                    CHECK(!composed_next);
                    continue;
                }
                ++oracle_transitions;
                REQUIRE(composed_next == join_state_tuple(*next));
                if (reached.insert(join_state_tuple(*next)).second) queue.push_back(*next);
            }
        }
        CHECK(reached == to_set(composed.states()));
        CHECK(oracle_transitions == composed.transitions().size());
    }
}

TEST_CASE("composition order only permutes state declarations") {
    GenParams p;
    p.seed = 77;
    p.min_components = 3;
    p.max_components = 3;
    auto comps = generate_system(p).to_system().components;
    Automaton left = compose_all(comps);
    Automaton right = parallel_compose(comps[0], parallel_compose(comps[1], comps[2]));
    CHECK(to_set(left.states()) == to_set(right.states()));
    CHECK(to_set(left.initial_states()) == to_set(right.initial_states()));
    auto key = [](const Automaton::Transition& t) { return t.from + " " + t.event + " " + t.to; };
    std::set<std::string> lt, rt;
    for (const auto& t : left.transitions()) lt.insert(key(t));
    for (const auto& t : right.transitions()) rt.insert(key(t));
    CHECK(lt == rt);
}

TEST_CASE("composition rejects duplicate component names") {
    Automaton a = toy();
    CHECK_THROWS_AS(parallel_compose(a, a), ModelError);
}

TEST_CASE("composed runs equal independent projected runs") {
    std::mt19937_64 rng(5);
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        GenParams p;
        p.seed = seed;
        auto comps = generate_system(p).to_system().components;
        Automaton composed = compose_all(comps);
        std::vector<std::string> events = composed.alphabet();
        for (const auto& start : testsupport::initial_tuples(comps)) {
            for (int t = 0; t < 20; ++t) {
                Word w;
                for (int k = detail::rand_int(rng, 0, 8); k > 0; --k)
                    w.push_back(events[detail::rand_int(rng, 0,
                                                        static_cast<int>(events.size()) - 1)]);
                auto direct = oracle_projected_runs(comps, start, w);
                auto composed_end = composed.run(join_state_tuple(start), w);
                REQUIRE(direct.has_value() == composed_end.has_value());
                if (direct) CHECK(join_state_tuple(*direct) == *composed_end);
            }
        }
    }
}

TEST_CASE("word enumeration is ordered, complete, and capped") {
    Automaton a = toy();
    auto runs = enumerate_words(a, 2);
    // runs from p with words of length <= 2: "", a, b, ab, ba, bb
    REQUIRE(runs.size() == 6);
    CHECK(runs[0].word.empty());
    CHECK(runs[1].word == Word{"a"});
    CHECK(runs[2].word == Word{"b"});
    CHECK(runs[3].word == Word{"a", "b"});
    CHECK(runs[4].word == Word{"b", "a"});
    CHECK(runs[5].word == Word{"b", "b"});
    for (const auto& r : runs) {
        CHECK(r.start == "p");
        CHECK(a.run(r.start, r.word) == r.end);
    }
    CHECK_THROWS_AS(enumerate_words(a, 10, 3), ResourceError);
}

TEST_CASE("tuple names split and join losslessly") {
    std::vector<std::string> t{"a1", "s2", "ready"};
    CHECK(split_state_tuple(join_state_tuple(t), 3) == t);
    CHECK_THROWS_AS(split_state_tuple("a,b", 3), ModelError);
    CHECK_THROWS_AS(split_state_tuple("a,,b", 2), ModelError);
}
