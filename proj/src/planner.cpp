#include "fha/planner.hpp"

#include "fha/error.hpp"
#include "fha/format.hpp"

#include <algorithm>
#include <cmath>

namespace fha {
namespace {

std::size_t jet_order(const FlatMaps& m) {
    return std::max({m.order_b(), m.order_c(), std::size_t{1}});
}

InputVector with_inputs(InputVector v, const std::map<std::size_t, bool>& assignment) {
    for (const auto& [id, value] : assignment) v.at(id) = value;
    return v;
}

std::string vector_text(const Vector& v) {
    return "(" + join_doubles(v, ',') + ")";
}

}  // namespace

double Plan::end_time() const {
    if (phases.empty()) return 0.0;
    return phases.back().start_time + phases.back().duration;
}

std::size_t Plan::phase_at(double t) const {
    std::size_t i = 0;
    while (i + 1 < phases.size() && t >= phases[i + 1].start_time) ++i;
    return i;
}

Vector select_switch_point(const SwitchingSpec& spec, const Vector& current, double epsilon, const Vector& scale,
                           const Box& domain) {
    if (spec.output_sets.size() != current.size() || domain.size() != current.size()) {
        throw PlanError("switching set and output differ in dimension");
    }
    if (!(epsilon > 0.0)) throw PlanError("switching margin must be positive");
    Vector target = current;
    for (std::size_t i = 0; i < current.size(); ++i) {
        const Interval& set = spec.output_sets[i];
        if (set.contains(current[i])) continue;
        const double margin = epsilon * (i < scale.size() ? scale[i] : 1.0);
        target[i] = current[i] <= set.lo ? set.lo + margin : set.hi - margin;
        if (!set.contains(target[i])) {
            throw PlanError("margin " + format_double(margin) + " overshoots switching set " + set.str() +
                            " of output " + std::to_string(i));
        }
        if (!domain[i].contains(target[i])) {
            throw PlanError("switching point " + format_double(target[i]) + " of output " + std::to_string(i) +
                            " lies outside the domain " + domain[i].str());
        }
    }
    return target;
}

OutputJet plan_output(const ModelDefinition& model, const PlanPhase& phase, double tau) {
    return evaluate_segment(phase.segment, tau, jet_order(model.maps(phase.state)));
}

Vector plan_state(const ModelDefinition& model, const PlanPhase& phase, double tau) {
    return model.maps(phase.state).inverse_state(plan_output(model, phase, tau));
}

Vector plan_input(const ModelDefinition& model, const PlanPhase& phase, double tau) {
    return model.maps(phase.state).inverse_input(plan_output(model, phase, tau));
}

Plan plan(const ModelDefinition& model, const PlanRequest& request) {
    const Automaton& a = model.automaton;
    if (request.initial_state.value >= a.state_count() || request.final_state.value >= a.state_count()) {
        throw PlanError("unknown initial or final state");
    }
    const FlatMaps& first_maps = model.maps(request.initial_state);
    if (request.x0.size() != first_maps.nx()) {
        throw PlanError("x0 has length " + std::to_string(request.x0.size()) + ", state '" +
                        a.state(request.initial_state).name + "' needs " + std::to_string(first_maps.nx()));
    }
    const InvariantSets final_inv = invariant_sets(a, request.final_state);
    if (request.z_final.size() != a.state(request.final_state).output_dim ||
        !final_inv.outputs.contains(request.z_final)) {
        throw PlanError("final output " + vector_text(request.z_final) + " is not in the invariant " +
                        final_inv.outputs.str() + " of '" + a.state(request.final_state).name + "'");
    }
    if (request.degree != 1 && request.degree != 3) throw PlanError("segment degree must be 1 or 3");

    Plan out;
    out.family = model.family;
    out.initial_state = request.initial_state;
    out.x0 = request.x0;
    out.epsilon = request.epsilon;
    out.degree = request.degree;

    if (request.path) {
        out.path = *request.path;
    } else {
        const auto walks = enumerate_walks(a, request.initial_state, request.final_state, a.transition_count(),
                                           WalkMode::Walk, 1);
        if (walks.empty()) {
            throw PlanError("no path from '" + a.state(request.initial_state).name + "' to '" +
                            a.state(request.final_state).name + "'");
        }
        out.path = walks.front();
    }
    try {
        out.sequence = path_to_sequence(a, out.path, request.initial_state);
    } catch (const ChainBreak& e) {
        throw PlanError(std::string("path infeasible: ") + e.what());
    }
    if (out.sequence.back() != request.final_state) {
        throw PlanError("path ends in '" + a.state(out.sequence.back()).name + "', not in '" +
                        a.state(request.final_state).name + "'");
    }

    std::vector<double> durations = request.durations;
    if (durations.empty()) durations.assign(out.path.size(), request.default_duration);
    if (durations.size() != out.path.size()) {
        throw PlanError("got " + std::to_string(durations.size()) + " durations for a path of " +
                        std::to_string(out.path.size()) + " transitions");
    }
    const double final_duration = request.final_duration.value_or(request.default_duration);
    for (double T : durations) {
        if (!(T > 0.0) || !std::isfinite(T)) throw PlanError("phase durations must be positive");
    }
    if (!(final_duration > 0.0) || !std::isfinite(final_duration)) {
        throw PlanError("final phase duration must be positive");
    }

    const InvariantSets start_inv = invariant_sets(a, request.initial_state);
    out.initial_inputs = with_inputs(InputVector(a.n_inputs(), false), start_inv.inputs);

    Vector hint = request.initial_outputs.value_or(model.initial.outputs);
    if (hint.size() != first_maps.nz()) hint.assign(first_maps.nz(), 0.0);
    Vector z = first_maps.initial_output(request.x0, hint);
    if (!start_inv.outputs.contains(z)) {
        throw PlanError("initial output " + vector_text(z) + " is not in the invariant " + start_inv.outputs.str() +
                        " of '" + a.state(request.initial_state).name + "'");
    }

    InputVector v = out.initial_inputs;
    double t = 0.0;
    for (std::size_t i = 0; i <= out.path.size(); ++i) {
        const StateId d = out.sequence[i];
        const FlatMaps& maps = model.maps(d);
        const bool last = i == out.path.size();

        PlanPhase phase;
        phase.state = d;
        phase.start_time = t;
        phase.duration = last ? final_duration : durations[i];
        phase.inputs = v;
        phase.start_jet = OutputJet::constant(z, 1);
        phase.x0 = maps.inverse_state(OutputJet::constant(z, jet_order(maps)));

        Vector target;
        SwitchingSpec spec;
        if (last) {
            target = request.z_final;
        } else {
            spec = guard_inverse(a, out.path[i]);
            target = select_switch_point(spec, z, request.epsilon, model.margin_scale, a.state(d).output_domain);
        }
        phase.segment = plan_segment(phase.start_jet, OutputJet::constant(target, 1), phase.duration, request.degree);

        if (!last) {
            const Transition& tr = a.transition(out.path[i]);
            PlanEvent ev;
            ev.transition = tr.id;
            ev.time = t + phase.duration;
            ev.inputs = spec.required_inputs;
            ev.v_after = with_inputs(v, spec.required_inputs);
            const OutputJet end = plan_output(model, phase, phase.duration);
            ev.z_before = end.value();
            ev.x_before = maps.inverse_state(end);
            ev.x_after = model.jump(tr.id).apply(ev.x_before, ev.z_before);
            if (!tr.guard.evaluate(ev.v_after, ev.z_before)) {
                throw PlanError("planned switch of '" + tr.name + "' does not satisfy its guard");
            }
            z = model.maps(tr.tail).initial_output(ev.x_after, ev.z_before);
            v = ev.v_after;
            t = ev.time;
            phase.event = std::move(ev);
        }
        out.phases.push_back(std::move(phase));
    }

    if (request.strict) {
        const auto violations = premature_firing_check(model, out, 64);
        if (!violations.empty()) throw PlanError("phase " + std::to_string(violations.front().phase) + ": " +
                                                 violations.front().message);
    }
    return out;
}

std::vector<FiringViolation> premature_firing_check(const ModelDefinition& model, const Plan& plan,
                                                    std::size_t samples) {
    const Automaton& a = model.automaton;
    std::vector<FiringViolation> out;
    for (std::size_t p = 0; p < plan.phases.size(); ++p) {
        const PlanPhase& phase = plan.phases[p];
        const std::string where = "state '" + a.state(phase.state).name + "'";
        for (std::size_t j = 1; j <= samples; ++j) {
            const double tau = phase.duration * static_cast<double>(j) / static_cast<double>(samples + 1);
            const Vector z = evaluate_segment(phase.segment, tau, 0).value();
            try {
                if (auto e = active_transition(a, phase.state, phase.inputs, z)) {
                    out.push_back({p, tau, e, "'" + a.transition(*e).name + "' fires early in " + where + " at z = " +
                                                  vector_text(z)});
                    break;
                }
            } catch (const NondeterminismError& err) {
                out.push_back({p, tau, std::nullopt, err.what()});
                break;
            }
        }
        if (!phase.event) continue;
        const PlanEvent& ev = *phase.event;
        std::optional<TransitionId> fired;
        std::string problem;
        try {
            fired = active_transition(a, phase.state, ev.v_after, ev.z_before);
        } catch (const NondeterminismError& err) {
            problem = err.what();
        }
        if (problem.empty() && fired != ev.transition) {
            problem = "planned switch '" + a.transition(ev.transition).name + "' does not fire";
            if (fired) problem += ", '" + a.transition(*fired).name + "' fires instead";
        }
        if (!problem.empty()) out.push_back({p, phase.duration, fired, problem});
    }
    return out;
}

PlanRequest default_request(const ModelDefinition& model) {
    PlanRequest r;
    r.initial_state = model.initial.state;
    r.x0 = model.initial.x0;
    r.final_state = model.initial.state;
    r.z_final = model.initial.outputs;
    return r;
}

}  // namespace fha
