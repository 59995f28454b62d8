#pragma once

#include "fha/automaton.hpp"

#include <random>
#include <string>
#include <vector>

namespace testing_support {

/// Random automaton with 1..max_states states, 1..3 inputs, 1..2 outputs
/// and guards mixing input and threshold atoms.  Thresholds come from a
/// small grid so that guards of different transitions share boundaries.
inline fha::Automaton random_automaton(std::mt19937_64& rng, std::size_t max_states = 6) {
    auto pick = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    };
    const std::size_t nd = pick(1, max_states);
    const std::size_t ni = pick(1, 3);
    const std::size_t nz = pick(1, 2);
    const double thresholds[] = {-1.0, 0.0, 0.5, 2.0, 3.25};
    const fha::Relation relations[] = {fha::Relation::Less, fha::Relation::LessEqual, fha::Relation::Greater,
                                       fha::Relation::GreaterEqual};

    std::vector<fha::DiscreteState> states;
    for (std::size_t i = 0; i < nd; ++i) {
        fha::DiscreteState s;
        s.id = fha::StateId(i);
        s.name = "d" + std::to_string(i + 1);
        s.output_dim = nz;
        states.push_back(std::move(s));
    }

    std::vector<fha::Transition> transitions;
    const std::size_t nt = pick(0, 3 * nd);
    std::vector<std::vector<int>> ranks(nd, std::vector<int>(nd, 0));
    for (std::size_t k = 0; k < nt; ++k) {
        fha::Transition t;
        t.id = fha::TransitionId(k);
        t.name = "e" + std::to_string(k + 1);
        t.head = fha::StateId(pick(0, nd - 1));
        t.tail = fha::StateId(pick(0, nd - 1));
        t.priority = ranks[t.head.value][t.tail.value]++;
        const std::size_t n_input_atoms = pick(0, ni);
        for (std::size_t a = 0; a < n_input_atoms; ++a) {
            t.guard.atoms.push_back(fha::GuardAtom::input(pick(0, ni - 1), pick(0, 1) == 1));
        }
        const std::size_t n_output_atoms = pick(0, 2);
        for (std::size_t a = 0; a < n_output_atoms; ++a) {
            t.guard.atoms.push_back(
                fha::GuardAtom::output(pick(0, nz - 1), relations[pick(0, 3)], thresholds[pick(0, 4)]));
        }
        transitions.push_back(std::move(t));
    }
    return fha::Automaton(std::move(states), ni, std::move(transitions), fha::StateId(0));
}

}  // namespace testing_support
