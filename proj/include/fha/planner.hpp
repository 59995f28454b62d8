#pragma once

#include "fha/automaton.hpp"
#include "fha/flat.hpp"
#include "fha/models.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fha {

struct PlanRequest {
    StateId initial_state;
    Vector x0;
    StateId final_state;
    /// Must lie in the continuous invariant of the final state.
    Vector z_final;
    /// Explicit path; without one the first walk to the final state is used.
    std::optional<Path> path;
    /// One duration per transition of the path; empty means all equal to
    /// default_duration.
    std::vector<double> durations;
    double default_duration = 16.0;
    /// Duration of the last phase, which ends in z_final without switching.
    std::optional<double> final_duration;
    /// Distance past a threshold at which the planned output switches, in
    /// units of the model's margin scale.
    double epsilon = 0.05;
    int degree = 1;
    /// Seeds flat-output components the initial state does not determine.
    std::optional<Vector> initial_outputs;
    /// Reject plans whose segments trigger a transition before their end.
    bool strict = false;
};

struct PlanEvent {
    TransitionId transition;
    double time = 0.0;
    /// V_e: inputs the event sets.
    std::map<std::size_t, bool> inputs;
    InputVector v_after;
    Vector x_before;
    Vector z_before;
    Vector x_after;
};

struct PlanPhase {
    StateId state;
    double start_time = 0.0;
    double duration = 0.0;
    /// Continuous state at the phase start, Phi(start_jet).
    Vector x0;
    OutputJet start_jet;
    TrajectorySegment segment;
    /// Discrete inputs held during the phase.
    InputVector inputs;
    /// Switch at the phase end; absent for the last phase.
    std::optional<PlanEvent> event;
};

struct Plan {
    std::string family;
    StateId initial_state;
    Vector x0;
    double epsilon = 0.0;
    int degree = 1;
    InputVector initial_inputs;
    std::vector<PlanPhase> phases;
    Path path;
    Sequence sequence;

    [[nodiscard]] double end_time() const;
    /// Phase active at absolute time t (the later phase at a switching time).
    [[nodiscard]] std::size_t phase_at(double t) const;
};

/// Switching flat output for one transition: components already inside the
/// switching set are held, the others move to the nearest bound pushed
/// `epsilon * scale[i]` into the set.  Throws PlanError if the result leaves
/// the set or `domain`.
[[nodiscard]] Vector select_switch_point(const SwitchingSpec& spec, const Vector& current, double epsilon,
                                         const Vector& scale, const Box& domain);

/// Explicit inversion.  Every phase plans a flat-output segment from the
/// current output to the next switching point; states and inputs follow
/// from Phi and Psi, jumps from the transition maps.  Throws PlanError for
/// infeasible requests.
[[nodiscard]] Plan plan(const ModelDefinition& model, const PlanRequest& request);

/// Planned flat-output jet, state and input of a phase at local time tau.
[[nodiscard]] OutputJet plan_output(const ModelDefinition& model, const PlanPhase& phase, double tau);
[[nodiscard]] Vector plan_state(const ModelDefinition& model, const PlanPhase& phase, double tau);
[[nodiscard]] Vector plan_input(const ModelDefinition& model, const PlanPhase& phase, double tau);

struct FiringViolation {
    std::size_t phase = 0;
    double tau = 0.0;
    std::optional<TransitionId> transition;
    std::string message;
};

/// Samples each phase at `samples` interior points with the held inputs and
/// reports any transition that would fire early; also reports switches
/// whose planned event does not fire the planned transition.
[[nodiscard]] std::vector<FiringViolation> premature_firing_check(const ModelDefinition& model, const Plan& plan,
                                                                  std::size_t samples);

/// Request that reproduces the built-in path experiment: start and end in
/// the model's initial state, return to its initial output.
[[nodiscard]] PlanRequest default_request(const ModelDefinition& model);

}  // namespace fha
