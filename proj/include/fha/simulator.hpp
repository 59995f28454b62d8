#pragma once

#include "fha/automaton.hpp"
#include "fha/flat.hpp"
#include "fha/models.hpp"
#include "fha/planner.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fha {

/// Which one-sided limit of a piecewise input to take at a breakpoint.
enum class Side { Left, Right };

/// Continuous input over [t0, t1].  `jet(t, n)` returns u and its first n
/// derivatives at absolute time t.
struct InputPiece {
    double t0 = 0.0;
    double t1 = 0.0;
    std::function<std::vector<Vector>(double t, std::size_t order)> jet;
};

/// Discrete input assignment applied at an instant.
struct InputEvent {
    double time = 0.0;
    std::size_t input = 0;
    bool value = false;
};

/// Continuous input u(t) plus timed discrete-input events.
class InputSchedule {
public:
    InputSchedule() = default;
    /// Pieces must be contiguous and sorted, events sorted by time.  Throws
    /// Error otherwise.
    InputSchedule(std::vector<InputPiece> pieces, std::vector<InputEvent> events, InputVector initial_inputs);

    /// u held at `value` over [0, t_end], no discrete events.
    [[nodiscard]] static InputSchedule constant(Vector value, double t_end, InputVector initial_inputs);

    [[nodiscard]] const std::vector<InputPiece>& pieces() const { return pieces_; }
    [[nodiscard]] const std::vector<InputEvent>& events() const { return events_; }
    [[nodiscard]] const InputVector& initial_inputs() const { return initial_; }
    [[nodiscard]] double end_time() const;

    /// Index of the piece active at t from the given side.
    [[nodiscard]] std::size_t piece_at(double t, Side side) const;
    [[nodiscard]] std::vector<Vector> jet(double t, std::size_t order, Side side) const;
    [[nodiscard]] std::vector<Vector> jet_in(std::size_t piece, double t, std::size_t order) const;

    /// Piece boundaries and event times in ascending order, duplicates removed.
    [[nodiscard]] std::vector<double> breakpoints() const;

private:
    std::vector<InputPiece> pieces_;
    std::vector<InputEvent> events_;
    InputVector initial_;
};

/// Piece whose derivatives come from central differences of `u` with step
/// 1e-4, evaluated inside [t0, t1] only.
[[nodiscard]] InputPiece function_piece(double t0, double t1, std::function<Vector(double)> u);

/// Polynomial piece in local time t - t0 with analytic derivatives.
[[nodiscard]] InputPiece polynomial_piece(double t0, double t1, std::vector<Vector> coeffs);

/// Feed-forward schedule of a plan: u = Psi of each phase segment, discrete
/// inputs set at each planned event.
[[nodiscard]] InputSchedule schedule_from_plan(const ModelDefinition& model, const Plan& plan);

struct SimConfig {
    double h = 0.016;
    double tolerance = 1e-9;
    /// Switchings allowed at one instant; 0 means the number of states.
    std::size_t chain_cap = 0;
    /// NaN means the schedule's end time.
    double t_end = std::numeric_limits<double>::quiet_NaN();
};

struct TraceSample {
    double t = 0.0;
    std::size_t k = 0;
    StateId state;
    InputVector v;
    Vector x;
    Vector z;
    Vector u;
};

struct TraceEvent {
    double t = 0.0;
    /// Position within the switching chain at this instant, from 0.
    std::size_t chain = 0;
    TransitionId transition;
    Vector x_before;
    Vector z_before;
    Vector x_after;
};

struct SimTrace {
    std::vector<TraceSample> samples;
    std::vector<TraceEvent> events;

    [[nodiscard]] Path path() const;
};

/// Classic RK4 with fixed step, bisection of guard crossings and
/// priority-resolved switching.  At each instant, due input events are
/// applied first, then transitions fire one at a time until none is active.
/// Throws ZenoError when a chain exceeds the cap, NondeterminismError from
/// conflicting guards and DomainError from the vector field.
[[nodiscard]] SimTrace simulate(const ModelDefinition& model, StateId d0, const Vector& x0,
                                const InputSchedule& schedule, const SimConfig& config = {});

struct PlanComparison {
    bool sequence_match = false;
    /// First event index where trace and plan disagree.
    std::optional<std::size_t> first_mismatch;
    /// |t_sim - t_plan| per matched event.
    std::vector<double> time_deviation;
    /// Largest |z_sim - z*| component per phase.
    std::vector<double> phase_deviation;
    double max_time_deviation = 0.0;
    double max_output_deviation = 0.0;

    [[nodiscard]] bool passed(double output_tolerance, double time_tolerance) const;
};

/// Samples are matched to plan phases by their k; z* is the phase segment at
/// the sample's local time, clamped to the phase.
[[nodiscard]] PlanComparison compare_trace_to_plan(const ModelDefinition& model, const SimTrace& trace,
                                                   const Plan& plan);

/// Trace sampled from the plan itself (Phi and Psi, no integration).
[[nodiscard]] SimTrace ideal_trace(const ModelDefinition& model, const Plan& plan, std::size_t samples_per_phase);

[[nodiscard]] std::string trace_to_csv(const ModelDefinition& model, const SimTrace& trace);
[[nodiscard]] std::string events_to_csv(const ModelDefinition& model, const SimTrace& trace);
[[nodiscard]] std::string trace_to_json(const ModelDefinition& model, const SimTrace& trace);

/// Reads the two CSV files written above back into a trace.  Throws Error
/// with a line number on malformed input.
[[nodiscard]] SimTrace trace_from_csv(const ModelDefinition& model, const std::string& samples,
                                      const std::string& events);

}  // namespace fha
