#pragma once

// Comparisons between library results and the brute-force oracles, shared by
// the property tests and the acceptance runner.  Each returns an empty string
// on agreement and a description of the first disagreement otherwise.

#include "fha/automaton.hpp"
#include "fha/error.hpp"

#include "support/oracles.hpp"

#include <map>
#include <string>
#include <vector>

namespace oracle {

inline std::string text(const std::vector<double>& z) {
    std::string s = "(";
    for (std::size_t i = 0; i < z.size(); ++i) s += (i ? ", " : "") + std::to_string(z[i]);
    return s + ")";
}

inline std::string bits(const fha::InputVector& v) {
    std::string s;
    for (bool b : v) s += b ? '1' : '0';
    return s;
}

/// Boolean-semiring (I + A)^(n-1) against breadth-first reachability.
inline std::string check_connectivity(const fha::Automaton& a) {
    const fha::BoolMatrix power = fha::reach_power(fha::adjacency(a));
    const Reach reach = bfs_reach(a);
    for (std::size_t i = 0; i < a.state_count(); ++i) {
        for (std::size_t j = 0; j < a.state_count(); ++j) {
            if (power.at(i, j) != reach[i][j]) {
                return "reachability " + std::to_string(i) + " -> " + std::to_string(j) + " differs";
            }
        }
    }
    if (fha::is_strongly_connected(fha::adjacency(a)) != all_reach(reach)) return "strong connectivity differs";
    return "";
}

/// Probe grid over the head state's outputs built from the given atoms.
inline std::vector<std::vector<double>> probe_grid(std::size_t nz, const std::vector<fha::GuardAtom>& atoms) {
    std::vector<std::vector<double>> thresholds(nz);
    for (const fha::GuardAtom& g : atoms) {
        if (g.kind == fha::GuardAtom::Kind::Output) thresholds[g.index].push_back(g.threshold);
    }
    std::vector<std::vector<double>> axes;
    for (const auto& t : thresholds) axes.push_back(probe_values(t));
    return grid(axes);
}

/// guard_inverse must reproduce the guard's truth value at every probe.
inline std::string check_guard_inverses(const fha::Automaton& a) {
    const auto inputs = all_inputs(a.n_inputs());
    for (const fha::Transition& t : a.transitions()) {
        const std::size_t nz = a.state(t.head).output_dim;
        const auto points = probe_grid(nz, t.guard.atoms);
        std::optional<fha::SwitchingSpec> spec;
        try {
            spec = fha::guard_inverse(a, t.id);
        } catch (const fha::GuardError&) {
        }
        for (const fha::InputVector& v : inputs) {
            for (const auto& z : points) {
                const bool truth = guard_holds(t.guard, v, z);
                bool predicted = false;
                if (spec) {
                    predicted = true;
                    for (const auto& [input, value] : spec->required_inputs) predicted = predicted && v[input] == value;
                    for (std::size_t i = 0; i < nz; ++i) predicted = predicted && in_interval(spec->output_sets[i], z[i]);
                }
                if (truth != predicted) {
                    return "transition " + std::to_string(t.id.value) + " at v=" + bits(v) + ", z=" + text(z) +
                           ": guard " + (truth ? "holds" : "fails") + ", inverse says " +
                           (predicted ? "holds" : "fails");
                }
            }
        }
    }
    return "";
}

/// A determinism conflict is reported iff some probe point fires two
/// transitions towards different tails, or an always-true guard shares its
/// state with another transition.
inline std::string check_determinism_by_probing(const fha::Automaton& a) {
    const auto inputs = all_inputs(a.n_inputs());
    bool witnessed = false;
    for (const fha::DiscreteState& d : a.states()) {
        std::vector<fha::GuardAtom> atoms;
        std::vector<const fha::Transition*> out;
        bool unguarded = false;
        for (const fha::Transition& t : a.transitions()) {
            if (t.head != d.id) continue;
            out.push_back(&t);
            if (t.guard.atoms.empty()) unguarded = true;
            atoms.insert(atoms.end(), t.guard.atoms.begin(), t.guard.atoms.end());
        }
        witnessed = witnessed || (unguarded && out.size() > 1);
        for (const auto& z : probe_grid(d.output_dim, atoms)) {
            for (const fha::InputVector& v : inputs) {
                std::map<std::size_t, bool> tails;
                for (const fha::Transition* t : out) {
                    if (guard_holds(t->guard, v, z)) tails[t->tail.value] = true;
                }
                witnessed = witnessed || tails.size() > 1;
            }
        }
    }
    const bool reported = !fha::check_determinism(a).empty();
    if (reported != witnessed) {
        return std::string("determinism check says ") + (reported ? "conflict" : "none") + ", probing found " +
               (witnessed ? "a conflict" : "none");
    }
    return "";
}

}  // namespace oracle
