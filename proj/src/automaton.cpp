#include "fha/automaton.hpp"

#include "fha/error.hpp"
#include "fha/format.hpp"

#include <algorithm>
#include <cmath>

namespace fha {
namespace {

std::string state_label(const Automaton& a, StateId d) {
    return a.state(d).name;
}

/// Required inputs of a guard, or nullopt if it asks for both values of one
/// input.
std::optional<std::map<std::size_t, bool>> merged_inputs(const std::vector<GuardAtom>& atoms,
                                                         std::map<std::size_t, bool> into = {}) {
    for (const GuardAtom& atom : atoms) {
        if (atom.kind != GuardAtom::Kind::Input) continue;
        auto [it, inserted] = into.emplace(atom.index, atom.value);
        if (!inserted && it->second != atom.value) return std::nullopt;
    }
    return into;
}

Box threshold_box(const std::vector<GuardAtom>& atoms, std::size_t dim) {
    Box box = whole_box(dim);
    for (const GuardAtom& atom : atoms) {
        if (atom.kind != GuardAtom::Kind::Output) continue;
        box[atom.index] = box[atom.index].intersect(Interval::from_relation(atom.relation, atom.threshold));
    }
    return box;
}

}  // namespace

bool GuardAtom::holds(const InputVector& v, std::span<const double> z) const {
    if (kind == Kind::Input) {
        if (index >= v.size()) throw Error("guard atom refers to input " + std::to_string(index) + " out of range");
        return v[index] == value;
    }
    if (index >= z.size()) throw Error("guard atom refers to output " + std::to_string(index) + " out of range");
    return compare(z[index], relation, threshold);
}

std::vector<GuardAtom> SwitchingRuleSet::discrete_part() const {
    std::vector<GuardAtom> out;
    std::copy_if(atoms.begin(), atoms.end(), std::back_inserter(out),
                 [](const GuardAtom& g) { return g.kind == GuardAtom::Kind::Input; });
    return out;
}

std::vector<GuardAtom> SwitchingRuleSet::continuous_part() const {
    std::vector<GuardAtom> out;
    std::copy_if(atoms.begin(), atoms.end(), std::back_inserter(out),
                 [](const GuardAtom& g) { return g.kind == GuardAtom::Kind::Output; });
    return out;
}

bool SwitchingRuleSet::evaluate_discrete(const InputVector& v) const {
    return std::all_of(atoms.begin(), atoms.end(), [&](const GuardAtom& g) {
        return g.kind != GuardAtom::Kind::Input || g.holds(v, {});
    });
}

bool SwitchingRuleSet::evaluate_continuous(std::span<const double> z) const {
    return std::all_of(atoms.begin(), atoms.end(), [&](const GuardAtom& g) {
        return g.kind != GuardAtom::Kind::Output || g.holds({}, z);
    });
}

bool SwitchingRuleSet::evaluate(const InputVector& v, std::span<const double> z) const {
    return evaluate_discrete(v) && evaluate_continuous(z);
}

Automaton::Automaton(std::vector<DiscreteState> states, std::size_t n_inputs, std::vector<Transition> transitions,
                     StateId initial)
    : states_(std::move(states)), n_inputs_(n_inputs), transitions_(std::move(transitions)), initial_(initial) {
    if (states_.empty()) throw ModelError("automaton needs at least one state");
    std::set<std::string> names;
    for (std::size_t i = 0; i < states_.size(); ++i) {
        DiscreteState& s = states_[i];
        if (s.id.value != i) throw ModelError("state ids must be dense: state '" + s.name + "' has id " +
                                              std::to_string(s.id.value) + ", expected " + std::to_string(i));
        if (!names.insert(s.name).second) throw ModelError("duplicate state name '" + s.name + "'");
        if (s.output_domain.empty()) s.output_domain = whole_box(s.output_dim);
        if (s.output_domain.size() != s.output_dim) {
            throw ModelError("state '" + s.name + "': output domain has wrong dimension");
        }
        for (const auto& [input, value] : s.invariant_inputs) {
            if (input >= n_inputs_) {
                throw ModelError("state '" + s.name + "': invariant input " + std::to_string(input) + " out of range");
            }
        }
    }
    if (initial_.value >= states_.size()) throw ModelError("initial state out of range");

    names.clear();
    std::map<std::pair<std::size_t, std::size_t>, std::vector<int>> groups;
    for (std::size_t i = 0; i < transitions_.size(); ++i) {
        const Transition& t = transitions_[i];
        const std::string where = "transition '" + t.name + "'";
        if (t.id.value != i) throw ModelError(where + ": ids must be dense");
        if (!names.insert(t.name).second) throw ModelError("duplicate transition name '" + t.name + "'");
        if (t.head.value >= states_.size()) throw ModelError(where + ": head " + std::to_string(t.head.value) +
                                                            " out of range (" + std::to_string(states_.size()) +
                                                            " states)");
        if (t.tail.value >= states_.size()) throw ModelError(where + ": tail " + std::to_string(t.tail.value) +
                                                            " out of range (" + std::to_string(states_.size()) +
                                                            " states)");
        for (const GuardAtom& atom : t.guard.atoms) {
            if (atom.kind == GuardAtom::Kind::Input) {
                if (atom.index >= n_inputs_) throw ModelError(where + ": input " + std::to_string(atom.index) +
                                                              " out of range");
            } else {
                if (atom.index >= states_[t.head.value].output_dim) {
                    throw ModelError(where + ": output component " + std::to_string(atom.index) + " out of range");
                }
                if (!std::isfinite(atom.threshold)) throw ModelError(where + ": threshold must be finite");
            }
        }
        groups[{t.head.value, t.tail.value}].push_back(t.priority);
    }
    for (auto& [key, ranks] : groups) {
        std::sort(ranks.begin(), ranks.end());
        for (std::size_t r = 0; r < ranks.size(); ++r) {
            if (ranks[r] != static_cast<int>(r)) {
                throw ModelError("priorities from '" + states_[key.first].name + "' to '" + states_[key.second].name +
                                 "' must be a permutation of 0.." + std::to_string(ranks.size() - 1));
            }
        }
    }
}

const DiscreteState& Automaton::state(StateId id) const {
    if (id.value >= states_.size()) throw Error("unknown state id " + std::to_string(id.value));
    return states_[id.value];
}

const Transition& Automaton::transition(TransitionId id) const {
    if (id.value >= transitions_.size()) throw Error("unknown transition id " + std::to_string(id.value));
    return transitions_[id.value];
}

std::optional<StateId> Automaton::find_state(const std::string& name) const {
    for (const DiscreteState& s : states_) {
        if (s.name == name) return s.id;
    }
    return std::nullopt;
}

std::optional<TransitionId> Automaton::find_transition(const std::string& name) const {
    for (const Transition& t : transitions_) {
        if (t.name == name) return t.id;
    }
    return std::nullopt;
}

std::vector<TransitionId> Automaton::outgoing(StateId d) const {
    std::vector<TransitionId> out;
    for (const Transition& t : transitions_) {
        if (t.head == d) out.push_back(t.id);
    }
    return out;
}

BoolMatrix BoolMatrix::identity(std::size_t n) {
    BoolMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
}

BoolMatrix BoolMatrix::operator*(const BoolMatrix& rhs) const {
    BoolMatrix out(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t k = 0; k < n_; ++k) {
            if (!at(i, k)) continue;
            for (std::size_t j = 0; j < n_; ++j) {
                if (rhs.at(k, j)) out.bits_[i * n_ + j] = 1;
            }
        }
    }
    return out;
}

bool BoolMatrix::all_true() const {
    return std::all_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; });
}

AdjacencyMatrix adjacency(const Automaton& a, const std::set<TransitionId>& excluded) {
    AdjacencyMatrix m(a.state_count());
    for (const Transition& t : a.transitions()) {
        if (excluded.count(t.id)) continue;
        ++m.at(t.head.value, t.tail.value);
    }
    return m;
}

BoolMatrix reach_power(const AdjacencyMatrix& m) {
    const std::size_t n = m.size();
    BoolMatrix base = BoolMatrix::identity(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (m.at(i, j) > 0) base.set(i, j, true);
        }
    }
    BoolMatrix result = BoolMatrix::identity(n);
    std::size_t exponent = n > 0 ? n - 1 : 0;
    while (exponent > 0) {
        if (exponent & 1U) result = result * base;
        exponent >>= 1U;
        if (exponent > 0) base = base * base;
    }
    return result;
}

bool is_strongly_connected(const AdjacencyMatrix& m) {
    return reach_power(m).all_true();
}

std::vector<TransitionId> delta(const Automaton& a, StateId head, StateId tail) {
    std::vector<const Transition*> found;
    for (const Transition& t : a.transitions()) {
        if (t.head == head && t.tail == tail) found.push_back(&t);
    }
    std::sort(found.begin(), found.end(), [](const Transition* x, const Transition* y) {
        return x->priority < y->priority;
    });
    std::vector<TransitionId> out;
    out.reserve(found.size());
    for (const Transition* t : found) out.push_back(t->id);
    return out;
}

std::pair<StateId, StateId> delta_inverse(const Automaton& a, TransitionId e) {
    const Transition& t = a.transition(e);
    return {t.head, t.tail};
}

SwitchingSpec guard_inverse(const Automaton& a, TransitionId e) {
    const Transition& t = a.transition(e);
    auto inputs = merged_inputs(t.guard.atoms);
    if (!inputs) throw GuardError("guard of '" + t.name + "' requires an input to be both 0 and 1");
    Box box = threshold_box(t.guard.atoms, a.state(t.head).output_dim);
    if (box_empty(box)) throw GuardError("guard of '" + t.name + "' has contradictory output thresholds");
    return {std::move(*inputs), std::move(box)};
}

InvariantSets invariant_sets(const Automaton& a, StateId d) {
    const DiscreteState& state = a.state(d);
    const Box& domain = state.output_domain;

    std::vector<SwitchingSpec> specs;
    std::set<std::size_t> relevant;
    for (const auto& [input, value] : state.invariant_inputs) relevant.insert(input);
    for (TransitionId e : a.outgoing(d)) {
        try {
            specs.push_back(guard_inverse(a, e));
        } catch (const GuardError&) {
            continue;  // never fires
        }
        for (const auto& [input, value] : specs.back().required_inputs) relevant.insert(input);
    }

    const std::vector<std::size_t> inputs(relevant.begin(), relevant.end());
    const std::size_t r = inputs.size();
    if (r >= 20) throw ModelError("state '" + state.name + "': too many relevant inputs");

    struct Assignment {
        std::map<std::size_t, bool> values;
        std::size_t enabled = 0;
        Region free;
    };
    std::vector<Assignment> assignments;
    for (std::size_t mask = 0; mask < (std::size_t{1} << r); ++mask) {
        Assignment as;
        for (std::size_t i = 0; i < r; ++i) as.values[inputs[i]] = ((mask >> (r - 1 - i)) & 1U) != 0;
        Region fired(state.output_dim);
        for (const SwitchingSpec& spec : specs) {
            const bool enabled = std::all_of(spec.required_inputs.begin(), spec.required_inputs.end(),
                                             [&](const auto& kv) { return as.values.at(kv.first) == kv.second; });
            if (!enabled) continue;
            ++as.enabled;
            fired = fired.unite(Region::from_box(box_intersect(spec.output_sets, domain)));
        }
        as.free = fired.complement_within(domain);
        assignments.push_back(std::move(as));
    }

    std::optional<Region> z_inv;
    for (const Assignment& as : assignments) {
        if (as.free.empty()) continue;
        z_inv = z_inv ? z_inv->intersect(as.free) : as.free;
    }
    if (!z_inv) throw ModelError("state '" + state.name + "': every input assignment fires a transition");
    Region outputs = z_inv->normalized();
    if (outputs.empty()) throw ModelError("state '" + state.name + "': continuous invariant is empty");

    auto covers = [&](const Assignment& as) { return outputs.subset_of(as.free); };

    if (!state.invariant_inputs.empty()) {
        for (const Assignment& as : assignments) {
            const bool matches = std::all_of(state.invariant_inputs.begin(), state.invariant_inputs.end(),
                                             [&](const auto& kv) { return as.values.at(kv.first) == kv.second; });
            if (matches && !covers(as)) {
                throw ModelError("state '" + state.name + "': declared discrete invariant lets a transition fire "
                                 "inside the continuous invariant");
            }
        }
        return {state.invariant_inputs, std::move(outputs)};
    }

    const Assignment* best = nullptr;
    for (const Assignment& as : assignments) {
        if (!covers(as)) continue;
        if (!best || as.enabled < best->enabled) best = &as;
    }
    if (!best) throw ModelError("state '" + state.name + "': no input assignment keeps the state invariant");
    return {best->values, std::move(outputs)};
}

std::optional<TransitionId> active_transition(const Automaton& a, StateId d, const InputVector& v,
                                              std::span<const double> z) {
    const DiscreteState& state = a.state(d);
    if (v.size() != a.n_inputs()) throw Error("input vector has wrong length");
    if (z.size() != state.output_dim) throw Error("output vector has wrong length for state '" + state.name + "'");
    const Transition* chosen = nullptr;
    for (TransitionId id : a.outgoing(d)) {
        const Transition& t = a.transition(id);
        if (!t.guard.evaluate(v, z)) continue;
        if (!chosen) {
            chosen = &t;
        } else if (chosen->tail != t.tail) {
            throw NondeterminismError("in state '" + state.name + "' transitions '" + chosen->name + "' and '" +
                                      t.name + "' fire together");
        } else if (t.priority < chosen->priority) {
            chosen = &t;
        }
    }
    if (!chosen) return std::nullopt;
    return chosen->id;
}

std::vector<DeterminismConflict> check_determinism(const Automaton& a) {
    std::vector<DeterminismConflict> conflicts;
    for (const DiscreteState& state : a.states()) {
        const auto out = a.outgoing(state.id);
        for (std::size_t i = 0; i < out.size(); ++i) {
            for (std::size_t j = i + 1; j < out.size(); ++j) {
                const Transition& x = a.transition(out[i]);
                const Transition& y = a.transition(out[j]);
                if (x.guard.atoms.empty() || y.guard.atoms.empty()) {
                    conflicts.push_back({x.id, y.id, "always-true guard shares its state with another transition"});
                    continue;
                }
                if (x.tail == y.tail) continue;
                auto inputs = merged_inputs(x.guard.atoms);
                if (!inputs) continue;
                inputs = merged_inputs(y.guard.atoms, std::move(*inputs));
                if (!inputs) continue;
                Box box = threshold_box(x.guard.atoms, state.output_dim);
                box = box_intersect(box, threshold_box(y.guard.atoms, state.output_dim));
                box = box_intersect(box, state.output_domain);
                if (box_empty(box)) continue;
                conflicts.push_back({x.id, y.id, "guards can hold together towards '" + state_label(a, x.tail) +
                                                     "' and '" + state_label(a, y.tail) + "'"});
            }
        }
    }
    return conflicts;
}

Path output_to_transitions(const Automaton& a, const std::vector<std::size_t>& symbols) {
    Path out;
    out.reserve(symbols.size());
    for (std::size_t w : symbols) {
        if (w >= a.transition_count()) throw Error("unknown output symbol " + std::to_string(w));
        out.emplace_back(w);
    }
    return out;
}

std::vector<std::size_t> transitions_to_output(const Automaton& a, const Path& path) {
    std::vector<std::size_t> out;
    out.reserve(path.size());
    for (TransitionId e : path) out.push_back(a.transition(e).id.value);
    return out;
}

Sequence path_to_sequence(const Automaton& a, const Path& path, StateId start) {
    Sequence seq{start};
    static_cast<void>(a.state(start));
    for (std::size_t i = 0; i < path.size(); ++i) {
        const Transition& t = a.transition(path[i]);
        if (t.head != seq.back()) {
            throw ChainBreak(i, "transition '" + t.name + "' at index " + std::to_string(i) + " leaves '" +
                                    a.state(t.head).name + "' but the path is in '" + a.state(seq.back()).name + "'");
        }
        seq.push_back(t.tail);
    }
    return seq;
}

namespace {

struct WalkSearch {
    const Automaton& a;
    StateId to;
    std::size_t max_len;
    WalkMode mode;
    std::size_t limit;
    std::vector<std::vector<TransitionId>> outgoing;
    std::vector<char> used;
    std::vector<char> visited;
    Path current;
    std::vector<Path> results;

    void run(StateId d) {
        if (results.size() >= limit || current.size() >= max_len) return;
        for (TransitionId e : outgoing[d.value]) {
            if (results.size() >= limit) return;
            const StateId next = a.transition(e).tail;
            if (mode == WalkMode::Walk) {
                if (used[e.value]) continue;
                used[e.value] = 1;
                current.push_back(e);
                if (next == to) results.push_back(current);
                run(next);
                current.pop_back();
                used[e.value] = 0;
            } else if (next == to) {
                current.push_back(e);
                results.push_back(current);
                current.pop_back();
            } else if (!visited[next.value]) {
                visited[next.value] = 1;
                current.push_back(e);
                run(next);
                current.pop_back();
                visited[next.value] = 0;
            }
        }
    }
};

}  // namespace

std::vector<Path> enumerate_walks(const Automaton& a, StateId from, StateId to, std::size_t max_len, WalkMode mode,
                                  std::size_t limit) {
    static_cast<void>(a.state(from));
    static_cast<void>(a.state(to));
    WalkSearch search{a, to, max_len, mode, limit, {}, {}, {}, {}, {}};
    search.outgoing.resize(a.state_count());
    for (const DiscreteState& s : a.states()) search.outgoing[s.id.value] = a.outgoing(s.id);
    search.used.assign(a.transition_count(), 0);
    search.visited.assign(a.state_count(), 0);
    search.visited[from.value] = 1;
    if (from == to && limit > 0) search.results.emplace_back();
    search.run(from);
    return search.results;
}

std::vector<TransitionId> removable_transitions(const Automaton& a) {
    if (!is_strongly_connected(adjacency(a))) throw Error("automaton is not strongly connected");
    std::vector<TransitionId> out;
    for (const Transition& t : a.transitions()) {
        if (is_strongly_connected(adjacency(a, {t.id}))) out.push_back(t.id);
    }
    return out;
}

std::vector<TransitionId> prune_transitions(const Automaton& a) {
    if (!is_strongly_connected(adjacency(a))) throw Error("automaton is not strongly connected");
    std::set<TransitionId> removed;
    for (const Transition& t : a.transitions()) {
        removed.insert(t.id);
        if (!is_strongly_connected(adjacency(a, removed))) removed.erase(t.id);
    }
    return {removed.begin(), removed.end()};
}

std::string describe_guard(const SwitchingRuleSet& guard, std::span<const std::string> input_names,
                           std::span<const std::string> output_names) {
    if (guard.atoms.empty()) return "true";
    std::string s;
    auto append = [&s](const std::string& part) {
        if (!s.empty()) s += ", ";
        s += part;
    };
    for (const GuardAtom& g : guard.continuous_part()) {
        const std::string name = g.index < output_names.size() ? output_names[g.index] : "z" + std::to_string(g.index);
        append(name + " " + std::string(to_string(g.relation)) + " " + format_double(g.threshold));
    }
    for (const GuardAtom& g : guard.discrete_part()) {
        const std::string name = g.index < input_names.size() ? input_names[g.index] : "v" + std::to_string(g.index);
        append(name + " = " + (g.value ? "1" : "0"));
    }
    return s;
}

}  // namespace fha
