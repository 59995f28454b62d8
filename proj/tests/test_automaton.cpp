#include "fha/automaton.hpp"
#include "fha/error.hpp"
#include "fha/model_io.hpp"
#include "fha/models.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <functional>

using namespace fha;

namespace {

Path named_path(const Automaton& a, std::initializer_list<const char*> names) {
    Path p;
    for (const char* n : names) p.push_back(*a.find_transition(n));
    return p;
}

Sequence named_states(const Automaton& a, std::initializer_list<const char*> names) {
    Sequence s;
    for (const char* n : names) s.push_back(*a.find_state(n));
    return s;
}

const std::initializer_list<const char*> kBuiltinPath = {"e1", "e6", "e11", "e5", "e7", "e2",
                                                       "e9", "e10", "e3", "e12", "e8", "e4"};
const std::initializer_list<const char*> kBuiltinSequence = {"d1", "d2", "d4", "d2", "d3", "d1", "d3",
                                                           "d4", "d1", "d4", "d3", "d2", "d1"};

std::map<std::size_t, bool> inputs(std::initializer_list<std::pair<const std::size_t, bool>> l) {
    return std::map<std::size_t, bool>(l);
}

/// Every path of length <= max_len from `from` to `to`, by exhaustive
/// enumeration of transition sequences.
std::vector<Path> brute_force_walks(const Automaton& a, StateId from, StateId to, std::size_t max_len, bool simple) {
    std::vector<Path> out;
    Path current;
    std::function<void(StateId)> extend = [&](StateId d) {
        if (d == to) out.push_back(current);
        if (current.size() == max_len) return;
        for (const Transition& t : a.transitions()) {
            if (t.head != d) continue;
            if (std::find(current.begin(), current.end(), t.id) != current.end()) continue;
            if (simple) {
                const Sequence seq = path_to_sequence(a, current, from);
                const bool revisits = std::find(seq.begin(), seq.end(), t.tail) != seq.end();
                if (revisits && !(t.tail == from && t.tail == to)) continue;
                if (seq.back() == to && !current.empty() && to == from) continue;
            }
            current.push_back(t.id);
            extend(t.tail);
            current.pop_back();
        }
    };
    extend(from);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("adjacency counts match the transition list for both models") {
    for (const std::string& family : model_families()) {
        const Automaton a = build_model(family).automaton;
        const AdjacencyMatrix m = adjacency(a);
        for (std::size_t i = 0; i < a.state_count(); ++i) {
            for (std::size_t j = 0; j < a.state_count(); ++j) {
                const auto n = std::count_if(a.transitions().begin(), a.transitions().end(), [&](const Transition& t) {
                    return t.head.value == i && t.tail.value == j;
                });
                CHECK(m.at(i, j) == static_cast<unsigned>(n));
                // Both automata connect every ordered pair of distinct states once.
                CHECK(m.at(i, j) == (i == j ? 0U : 1U));
            }
        }
    }
}

TEST_CASE("reachability power agrees with breadth-first search") {
    for (const std::string& family : model_families()) {
        const Automaton a = build_model(family).automaton;
        const BoolMatrix r = reach_power(adjacency(a));
        const oracle::Reach bfs = oracle::bfs_reach(a);
        for (std::size_t i = 0; i < a.state_count(); ++i) {
            for (std::size_t j = 0; j < a.state_count(); ++j) CHECK(r.at(i, j) == bfs[i][j]);
        }
        CHECK(is_strongly_connected(adjacency(a)));
    }
}

TEST_CASE("a one-way chain is not strongly connected") {
    const ModelDefinition m = load_model_file(FHA_TEST_DATA "/two_cycle_tank.json");
    const std::set<TransitionId> drop{*m.automaton.find_transition("e2")};
    CHECK_FALSE(is_strongly_connected(adjacency(m.automaton, drop)));
    CHECK(is_strongly_connected(adjacency(m.automaton)));
    CHECK_FALSE(oracle::all_reach(oracle::bfs_reach(m.automaton, drop)));
}

TEST_CASE("boolean matrix product") {
    BoolMatrix a(2);
    a.set(0, 1, true);
    BoolMatrix b(2);
    b.set(1, 0, true);
    const BoolMatrix c = a * b;
    CHECK(c.at(0, 0));
    CHECK_FALSE(c.at(0, 1));
    CHECK_FALSE(c.at(1, 0));
    CHECK((BoolMatrix::identity(3) * BoolMatrix::identity(3)).at(2, 2));
    CHECK_FALSE(BoolMatrix::identity(2).all_true());
}

TEST_CASE("the built-in path yields the documented state sequence in both models") {
    for (const std::string& family : model_families()) {
        const Automaton a = build_model(family).automaton;
        const Sequence s = path_to_sequence(a, named_path(a, kBuiltinPath), *a.find_state("d1"));
        CHECK(s == named_states(a, kBuiltinSequence));
    }
}

TEST_CASE("single transitions and chain breaks") {
    const Automaton a = one_tank().automaton;
    const StateId d1 = *a.find_state("d1");
    CHECK(path_to_sequence(a, named_path(a, {"e1"}), d1) == named_states(a, {"d1", "d2"}));
    CHECK(path_to_sequence(a, {}, d1) == named_states(a, {"d1"}));
    try {
        static_cast<void>(path_to_sequence(a, named_path(a, {"e1", "e1"}), d1));
        FAIL("expected a chain break");
    } catch (const ChainBreak& e) {
        CHECK(e.index() == 1);
    }
}

TEST_CASE("output symbols map one to one onto transitions") {
    const Automaton a = one_tank().automaton;
    const Path p = output_to_transitions(a, {0, 5});
    CHECK(p == named_path(a, {"e1", "e6"}));
    CHECK(transitions_to_output(a, p) == std::vector<std::size_t>{0, 5});
    CHECK_THROWS_AS(static_cast<void>(output_to_transitions(a, {12})), Error);
}

TEST_CASE("delta and its inverse") {
    const Automaton a = one_tank().automaton;
    CHECK(delta(a, *a.find_state("d1"), *a.find_state("d2")) == named_path(a, {"e1"}));
    CHECK(delta(a, *a.find_state("d1"), *a.find_state("d1")).empty());
    const auto [head, tail] = delta_inverse(a, *a.find_transition("e6"));
    CHECK(a.state(head).name == "d2");
    CHECK(a.state(tail).name == "d4");
}

TEST_CASE("guard inverse of tank transitions") {
    const Automaton a = one_tank().automaton;
    const SwitchingSpec e1 = guard_inverse(a, *a.find_transition("e1"));
    CHECK(e1.required_inputs == inputs({{0, true}}));
    CHECK(Region::from_box(e1.output_sets).str() == "(-inf, 5]");
    const SwitchingSpec e6 = guard_inverse(a, *a.find_transition("e6"));
    CHECK(e6.required_inputs == inputs({{0, true}}));
    CHECK(Region::from_box(e6.output_sets).str() == "(5, inf)");
}

TEST_CASE("guard inverse of the network's double crossing") {
    const Automaton a = dc_network().automaton;
    const SwitchingSpec e3 = guard_inverse(a, *a.find_transition("e3"));
    CHECK(e3.required_inputs == inputs({{0, true}, {1, true}}));
    CHECK(Region::from_box(e3.output_sets).str() == "[6, inf) x [0.5, inf)");
}

TEST_CASE("contradictory guards are rejected") {
    std::vector<DiscreteState> states(1);
    states[0].id = StateId(0);
    states[0].name = "d1";
    states[0].output_dim = 1;
    Transition t;
    t.id = TransitionId(0);
    t.name = "e1";
    t.head = t.tail = StateId(0);
    t.guard.atoms = {GuardAtom::input(0, true), GuardAtom::input(0, false)};
    Transition u = t;
    u.id = TransitionId(1);
    u.name = "e2";
    u.priority = 1;
    u.guard.atoms = {GuardAtom::output(0, Relation::Less, 1.0), GuardAtom::output(0, Relation::Greater, 1.0)};
    const Automaton a(std::move(states), 1, {t, u}, StateId(0));
    CHECK_THROWS_AS(static_cast<void>(guard_inverse(a, TransitionId(0))), GuardError);
    CHECK_THROWS_AS(static_cast<void>(guard_inverse(a, TransitionId(1))), GuardError);
}

TEST_CASE("invariant sets of the tank") {
    const Automaton a = one_tank().automaton;
    const char* expected[][2] = {{"d1", "[0, 5]"}, {"d2", "[0, 5]"}, {"d3", "(5, inf)"}, {"d4", "(5, inf)"}};
    const bool valve[] = {false, true, false, true};
    for (std::size_t i = 0; i < 4; ++i) {
        const InvariantSets inv = invariant_sets(a, *a.find_state(expected[i][0]));
        CHECK(inv.outputs.str() == expected[i][1]);
        CHECK(inv.inputs == inputs({{0, valve[i]}}));
    }
}

TEST_CASE("invariant sets of the network") {
    const Automaton a = dc_network().automaton;
    const char* expected[][2] = {{"d1", "(-inf, 6) x (-inf, 0.5)"},
                                 {"d2", "[6, inf) x (-inf, 0.5)"},
                                 {"d3", "(-inf, 6) x [0.5, inf)"},
                                 {"d4", "[6, inf) x [0.5, inf)"}};
    const bool v1[] = {false, true, false, true};
    const bool v2[] = {false, false, true, true};
    for (std::size_t i = 0; i < 4; ++i) {
        const InvariantSets inv = invariant_sets(a, *a.find_state(expected[i][0]));
        CHECK(inv.outputs.str() == expected[i][1]);
        CHECK(inv.inputs == inputs({{0, v1[i]}, {1, v2[i]}}));
    }
}

TEST_CASE("no transition fires inside a state's invariant") {
    for (const std::string& family : model_families()) {
        const Automaton a = build_model(family).automaton;
        for (const DiscreteState& s : a.states()) {
            const InvariantSets inv = invariant_sets(a, s.id);
            InputVector v(a.n_inputs(), false);
            for (const auto& [id, value] : inv.inputs) v[id] = value;
            std::vector<double> thresholds{0.0, 0.5, 5.0, 6.0};
            std::vector<std::vector<double>> axes(s.output_dim, oracle::probe_values(thresholds));
            for (const auto& z : oracle::grid(axes)) {
                if (!inv.outputs.contains(z)) continue;
                for (TransitionId e : a.outgoing(s.id)) {
                    CHECK_FALSE(oracle::guard_holds(a.transition(e).guard, v, z));
                }
            }
        }
    }
}

TEST_CASE("active transition") {
    const Automaton a = one_tank().automaton;
    const StateId d1 = *a.find_state("d1");
    CHECK(active_transition(a, d1, {true}, std::vector<double>{3.0}) == a.find_transition("e1"));
    CHECK_FALSE(active_transition(a, d1, {false}, std::vector<double>{3.0}).has_value());
    CHECK(active_transition(a, d1, {false}, std::vector<double>{5.5}) == a.find_transition("e2"));
    CHECK(active_transition(a, d1, {true}, std::vector<double>{5.0}) == a.find_transition("e1"));
    CHECK(active_transition(a, d1, {true}, std::vector<double>{std::nextafter(5.0, 6.0)}) ==
          a.find_transition("e3"));
}

TEST_CASE("both models are deterministic") {
    for (const std::string& family : model_families()) CHECK(check_determinism(build_model(family).automaton).empty());
}

TEST_CASE("the mutated tank guard yields exactly one conflict") {
    const ModelDefinition m = load_model_file(FHA_TEST_DATA "/tank_mutated_e2.json");
    const auto conflicts = check_determinism(m.automaton);
    REQUIRE(conflicts.size() == 1);
    CHECK(m.automaton.transition(conflicts[0].first).name == "e1");
    CHECK(m.automaton.transition(conflicts[0].second).name == "e2");
    CHECK_THROWS_AS(static_cast<void>(active_transition(m.automaton, *m.automaton.find_state("d1"), {true},
                                                        std::vector<double>{1.0})),
                    NondeterminismError);
}

TEST_CASE("walk enumeration matches exhaustive search") {
    const Automaton a = one_tank().automaton;
    const StateId d1 = *a.find_state("d1");
    const StateId d4 = *a.find_state("d4");
    for (std::size_t len = 0; len <= 4; ++len) {
        CHECK(enumerate_walks(a, d1, d1, len, WalkMode::Walk) == brute_force_walks(a, d1, d1, len, false));
        CHECK(enumerate_walks(a, d1, d4, len, WalkMode::Walk) == brute_force_walks(a, d1, d4, len, false));
        CHECK(enumerate_walks(a, d1, d4, len, WalkMode::Simple) == brute_force_walks(a, d1, d4, len, true));
    }
    CHECK(enumerate_walks(a, d1, d4, 4, WalkMode::Walk, 3).size() == 3);
}

TEST_CASE("the built-in path is a walk but not a simple path") {
    const Automaton a = dc_network().automaton;
    const StateId d1 = *a.find_state("d1");
    const Path p = named_path(a, kBuiltinPath);
    const auto walks = enumerate_walks(a, d1, d1, 12, WalkMode::Walk);
    CHECK(std::find(walks.begin(), walks.end(), p) != walks.end());
    const auto simple = enumerate_walks(a, d1, d1, 12, WalkMode::Simple);
    CHECK(std::find(simple.begin(), simple.end(), p) == simple.end());
    for (const Path& s : simple) CHECK(s.size() <= a.state_count());
}

TEST_CASE("removable transitions of the network include the minimal-realisation set") {
    const Automaton a = dc_network().automaton;
    const Path removable = removable_transitions(a);
    for (const char* name : {"e3", "e5", "e8", "e10"}) {
        CHECK(std::find(removable.begin(), removable.end(), *a.find_transition(name)) != removable.end());
    }
    const Path drop = named_path(a, {"e3", "e5", "e8", "e10"});
    CHECK(is_strongly_connected(adjacency(a, {drop.begin(), drop.end()})));
}

TEST_CASE("greedy pruning is maximal") {
    for (const std::string& family : model_families()) {
        const Automaton a = build_model(family).automaton;
        const Path pruned = prune_transitions(a);
        std::set<TransitionId> dropped(pruned.begin(), pruned.end());
        CHECK(oracle::all_reach(oracle::bfs_reach(a, dropped)));
        for (const Transition& t : a.transitions()) {
            if (dropped.count(t.id)) continue;
            auto more = dropped;
            more.insert(t.id);
            CHECK_FALSE(oracle::all_reach(oracle::bfs_reach(a, more)));
        }
    }
}

TEST_CASE("nothing is removable from a two-state cycle") {
    const ModelDefinition m = load_model_file(FHA_TEST_DATA "/two_cycle_tank.json");
    CHECK(removable_transitions(m.automaton).empty());
    CHECK(prune_transitions(m.automaton).empty());
    CHECK_FALSE(removable_transitions(one_tank().automaton).empty());
}

TEST_CASE("guards render readably") {
    const ModelDefinition m = one_tank();
    const Transition& e1 = m.automaton.transition(*m.automaton.find_transition("e1"));
    CHECK(describe_guard(e1.guard, m.input_names, m.output_names) == "l1 <= 5, v1 = 1");
    CHECK(describe_guard(e1.guard) == "z0 <= 5, v0 = 1");
    CHECK(describe_guard(SwitchingRuleSet{}) == "true");
}

TEST_CASE("automaton construction rejects broken ids") {
    std::vector<DiscreteState> states(1);
    states[0].id = StateId(0);
    states[0].name = "d1";
    states[0].output_dim = 1;
    Transition t;
    t.id = TransitionId(0);
    t.name = "e1";
    t.head = StateId(0);
    t.tail = StateId(3);
    CHECK_THROWS_AS(Automaton(states, 1, {t}, StateId(0)), ModelError);
    t.tail = StateId(0);
    t.guard.atoms = {GuardAtom::input(2, true)};
    CHECK_THROWS_AS(Automaton(states, 1, {t}, StateId(0)), ModelError);
    CHECK_THROWS_AS(Automaton(states, 1, {}, StateId(1)), ModelError);
    CHECK_THROWS_AS(Automaton({}, 1, {}, StateId(0)), ModelError);
}
