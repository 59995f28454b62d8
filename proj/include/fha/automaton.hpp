#pragma once

#include "fha/interval.hpp"
#include "fha/region.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fha {

/// Strongly typed dense index.
template <class Tag>
struct Index {
    std::size_t value = 0;

    constexpr Index() = default;
    constexpr explicit Index(std::size_t v) : value(v) {}

    auto operator<=>(const Index&) const = default;
};

using StateId = Index<struct StateTag>;
using TransitionId = Index<struct TransitionTag>;

/// Discrete input assignment v, one boolean per input.
using InputVector = std::vector<bool>;

/// One condition of a guard: either `v[index] == value` or
/// `z[index] <relation> threshold`.
struct GuardAtom {
    enum class Kind { Input, Output };

    Kind kind = Kind::Input;
    std::size_t index = 0;
    bool value = false;
    Relation relation = Relation::Less;
    double threshold = 0.0;

    [[nodiscard]] static GuardAtom input(std::size_t id, bool required) {
        return {Kind::Input, id, required, Relation::Less, 0.0};
    }
    [[nodiscard]] static GuardAtom output(std::size_t component, Relation r, double threshold) {
        return {Kind::Output, component, false, r, threshold};
    }

    [[nodiscard]] bool holds(const InputVector& v, std::span<const double> z) const;

    bool operator==(const GuardAtom&) const = default;
};

/// Conjunction of guard atoms.  The discrete part collects the input atoms,
/// the continuous part the output threshold atoms.
struct SwitchingRuleSet {
    std::vector<GuardAtom> atoms;

    [[nodiscard]] std::vector<GuardAtom> discrete_part() const;
    [[nodiscard]] std::vector<GuardAtom> continuous_part() const;

    [[nodiscard]] bool evaluate_discrete(const InputVector& v) const;
    [[nodiscard]] bool evaluate_continuous(std::span<const double> z) const;
    [[nodiscard]] bool evaluate(const InputVector& v, std::span<const double> z) const;

    bool operator==(const SwitchingRuleSet&) const = default;
};

struct Transition {
    TransitionId id;
    std::string name;
    StateId head;
    StateId tail;
    /// Rank among the transitions sharing head and tail; 0 wins.
    int priority = 0;
    SwitchingRuleSet guard;
};

struct DiscreteState {
    StateId id;
    std::string name;
    std::size_t output_dim = 0;
    /// Admissible flat outputs; threshold sets are clipped to it.
    Box output_domain;
    /// Declared discrete invariant.  Empty means "derive it".
    std::map<std::size_t, bool> invariant_inputs;
};

/// Discrete subsystem: states, inputs, guarded prioritized transitions and
/// the initial state.  The output alphabet has one symbol per transition.
class Automaton {
public:
    Automaton() = default;
    /// Throws ModelError on dangling ids, non-dense ids, bad priorities,
    /// out-of-range atoms or an invalid initial state.
    Automaton(std::vector<DiscreteState> states, std::size_t n_inputs, std::vector<Transition> transitions,
              StateId initial);

    [[nodiscard]] std::size_t state_count() const { return states_.size(); }
    [[nodiscard]] std::size_t transition_count() const { return transitions_.size(); }
    [[nodiscard]] std::size_t n_inputs() const { return n_inputs_; }
    [[nodiscard]] StateId initial() const { return initial_; }

    [[nodiscard]] const std::vector<DiscreteState>& states() const { return states_; }
    [[nodiscard]] const std::vector<Transition>& transitions() const { return transitions_; }
    [[nodiscard]] const DiscreteState& state(StateId id) const;
    [[nodiscard]] const Transition& transition(TransitionId id) const;

    [[nodiscard]] std::optional<StateId> find_state(const std::string& name) const;
    [[nodiscard]] std::optional<TransitionId> find_transition(const std::string& name) const;

    /// Transitions leaving `d`, in id order.
    [[nodiscard]] std::vector<TransitionId> outgoing(StateId d) const;

private:
    std::vector<DiscreteState> states_;
    std::size_t n_inputs_ = 0;
    std::vector<Transition> transitions_;
    StateId initial_;
};

/// a_ij = number of transitions from state i to state j.
class AdjacencyMatrix {
public:
    explicit AdjacencyMatrix(std::size_t n = 0) : n_(n), entries_(n * n, 0) {}

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] unsigned at(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
    unsigned& at(std::size_t i, std::size_t j) { return entries_[i * n_ + j]; }

    bool operator==(const AdjacencyMatrix&) const = default;

private:
    std::size_t n_;
    std::vector<unsigned> entries_;
};

/// Square matrix over the boolean semiring (OR, AND).
class BoolMatrix {
public:
    explicit BoolMatrix(std::size_t n = 0) : n_(n), bits_(n * n, 0) {}

    [[nodiscard]] static BoolMatrix identity(std::size_t n);

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] bool at(std::size_t i, std::size_t j) const { return bits_[i * n_ + j] != 0; }
    void set(std::size_t i, std::size_t j, bool value) { bits_[i * n_ + j] = value ? 1 : 0; }

    [[nodiscard]] BoolMatrix operator*(const BoolMatrix& rhs) const;
    [[nodiscard]] bool all_true() const;

private:
    std::size_t n_;
    std::vector<std::uint8_t> bits_;
};

/// Adjacency counts, ignoring the transitions listed in `excluded`.
[[nodiscard]] AdjacencyMatrix adjacency(const Automaton& a, const std::set<TransitionId>& excluded = {});

/// (I + A)^(n-1) evaluated in the boolean semiring.
[[nodiscard]] BoolMatrix reach_power(const AdjacencyMatrix& m);

/// True iff every entry of (I + A)^(n-1) is positive.
[[nodiscard]] bool is_strongly_connected(const AdjacencyMatrix& m);

/// Transitions from head to tail, best priority first.
[[nodiscard]] std::vector<TransitionId> delta(const Automaton& a, StateId head, StateId tail);

/// (head, tail) of a transition.  Throws Error for an unknown id.
[[nodiscard]] std::pair<StateId, StateId> delta_inverse(const Automaton& a, TransitionId e);

/// Inverse image of a guard: required inputs and, per output component of
/// the head state, the interval of values satisfying every threshold atom.
struct SwitchingSpec {
    std::map<std::size_t, bool> required_inputs;
    Box output_sets;

    bool operator==(const SwitchingSpec&) const = default;
};

/// Throws GuardError if the guard's atoms admit no point.
[[nodiscard]] SwitchingSpec guard_inverse(const Automaton& a, TransitionId e);

struct InvariantSets {
    std::map<std::size_t, bool> inputs;
    Region outputs;
};

/// Discrete and continuous invariant of a state.
///
/// Let R be the inputs mentioned by outgoing guards.  For every assignment of
/// R, the free region is the state's output domain minus the switching sets
/// of the transitions whose discrete part that assignment enables.  The
/// continuous invariant is the intersection of all non-empty free regions;
/// the discrete invariant is the declared one, or else the assignment whose
/// free region contains the continuous invariant with the fewest enabled
/// transitions (ties broken lexicographically, false before true).
/// Throws ModelError when no consistent pair exists.
[[nodiscard]] InvariantSets invariant_sets(const Automaton& a, StateId d);

/// The transition that fires in state `d` for (v, z), if any.  Parallel
/// transitions are resolved by priority; two firing transitions with
/// different tails raise NondeterminismError.
[[nodiscard]] std::optional<TransitionId> active_transition(const Automaton& a, StateId d, const InputVector& v,
                                                            std::span<const double> z);

struct DeterminismConflict {
    TransitionId first;
    TransitionId second;
    std::string reason;
};

/// Pairs of transitions leaving the same state towards different tails
/// whose guards can hold together, plus always-true guards that share their
/// head with another transition.  Empty means deterministic.
[[nodiscard]] std::vector<DeterminismConflict> check_determinism(const Automaton& a);

using Path = std::vector<TransitionId>;
using Sequence = std::vector<StateId>;

/// Output symbol w_i corresponds to transition e_i.  Throws Error on an
/// unknown symbol.
[[nodiscard]] Path output_to_transitions(const Automaton& a, const std::vector<std::size_t>& symbols);
[[nodiscard]] std::vector<std::size_t> transitions_to_output(const Automaton& a, const Path& path);

/// States visited by `path` starting in `start`.  Throws ChainBreak at the
/// first transition whose head is not the current state.
[[nodiscard]] Sequence path_to_sequence(const Automaton& a, const Path& path, StateId start);

enum class WalkMode {
    /// No state is visited twice (a closed path may return to its start).
    Simple,
    /// States may repeat, each transition is used at most once.
    Walk,
};

/// All paths from `from` to `to` of at most `max_len` transitions in
/// lexicographic order of transition ids, stopping after `limit` results.
[[nodiscard]] std::vector<Path> enumerate_walks(const Automaton& a, StateId from, StateId to, std::size_t max_len,
                                                WalkMode mode,
                                                std::size_t limit = std::numeric_limits<std::size_t>::max());

/// Transitions whose individual removal keeps the automaton strongly
/// connected.  Throws Error if it is not strongly connected to begin with.
[[nodiscard]] std::vector<TransitionId> removable_transitions(const Automaton& a);

/// Greedy maximal removable set: transitions are dropped in id order while
/// the remainder stays strongly connected.
[[nodiscard]] std::vector<TransitionId> prune_transitions(const Automaton& a);

/// Human readable guard, e.g. "l1 > 5, v1 = 1".  Components without a
/// supplied name print as z<i> / v<i>.
[[nodiscard]] std::string describe_guard(const SwitchingRuleSet& guard, std::span<const std::string> input_names = {},
                                         std::span<const std::string> output_names = {});

}  // namespace fha
