#include "fha/automaton.hpp"

#include "support/oracle_checks.hpp"
#include "support/random_automaton.hpp"

#include <doctest.h>

#include <random>

using namespace fha;

TEST_CASE("random automata agree with the brute-force oracles") {
    std::mt19937_64 rng(0xfa11);
    for (int trial = 0; trial < 200; ++trial) {
        const Automaton a = testing_support::random_automaton(rng);
        CAPTURE(trial);
        CHECK(oracle::check_connectivity(a) == "");
        CHECK(oracle::check_guard_inverses(a) == "");
        CHECK(oracle::check_determinism_by_probing(a) == "");
    }
}

TEST_CASE("random automata with pruned transitions stay connected") {
    std::mt19937_64 rng(0xbeef);
    for (int trial = 0; trial < 100; ++trial) {
        const Automaton a = testing_support::random_automaton(rng);
        if (!is_strongly_connected(adjacency(a))) continue;
        CAPTURE(trial);
        const auto removed = prune_transitions(a);
        const std::set<TransitionId> excluded(removed.begin(), removed.end());
        CHECK(oracle::all_reach(oracle::bfs_reach(a, excluded)));
        // Maximal: no further transition can go.
        for (const Transition& t : a.transitions()) {
            if (excluded.count(t.id)) continue;
            std::set<TransitionId> more = excluded;
            more.insert(t.id);
            CHECK_FALSE(oracle::all_reach(oracle::bfs_reach(a, more)));
        }
    }
}

TEST_CASE("random walks invert to their visited states") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const Automaton a = testing_support::random_automaton(rng);
        CAPTURE(trial);
        StateId at = a.initial();
        Path path;
        Sequence visited{at};
        for (int step = 0; step < 8; ++step) {
            std::vector<const Transition*> out;
            for (const Transition& t : a.transitions()) {
                if (t.head == at) out.push_back(&t);
            }
            if (out.empty()) break;
            const Transition* t = out[std::uniform_int_distribution<std::size_t>(0, out.size() - 1)(rng)];
            path.push_back(t->id);
            at = t->tail;
            visited.push_back(at);
        }
        CHECK(path_to_sequence(a, path, a.initial()) == visited);
        CHECK(output_to_transitions(a, transitions_to_output(a, path)) == path);
    }
}
