#include "fha/simulator.hpp"

#include "fha/error.hpp"
#include "fha/format.hpp"

#include <algorithm>
#include <cmath>

namespace fha {
namespace {

constexpr double kFdStep = 1e-4;

double instant_slack(double t) {
    return 1e-12 * std::max(1.0, std::abs(t));
}

Vector axpy(const Vector& x, double a, const Vector& y) {
    Vector out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * y[i];
    return out;
}

std::string vector_text(const Vector& v) {
    return "(" + join_doubles(v, ',') + ")";
}

}  // namespace

InputSchedule::InputSchedule(std::vector<InputPiece> pieces, std::vector<InputEvent> events,
                             InputVector initial_inputs)
    : pieces_(std::move(pieces)), events_(std::move(events)), initial_(std::move(initial_inputs)) {
    if (pieces_.empty()) throw Error("input schedule needs at least one piece");
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const InputPiece& p = pieces_[i];
        if (!(p.t1 > p.t0) || !p.jet) throw Error("input piece " + std::to_string(i) + " is empty");
        if (i > 0 && p.t0 != pieces_[i - 1].t1) {
            throw Error("input piece " + std::to_string(i) + " does not start where piece " + std::to_string(i - 1) +
                        " ends");
        }
    }
    if (!std::is_sorted(events_.begin(), events_.end(),
                        [](const InputEvent& a, const InputEvent& b) { return a.time < b.time; })) {
        throw Error("input events are not sorted by time");
    }
    for (const InputEvent& e : events_) {
        if (e.input >= initial_.size()) {
            throw Error("input event refers to input " + std::to_string(e.input) + " of " +
                        std::to_string(initial_.size()));
        }
    }
}

InputSchedule InputSchedule::constant(Vector value, double t_end, InputVector initial_inputs) {
    InputPiece p;
    p.t0 = 0.0;
    p.t1 = t_end;
    p.jet = [value](double, std::size_t order) {
        std::vector<Vector> out(order + 1, Vector(value.size(), 0.0));
        out[0] = value;
        return out;
    };
    return InputSchedule({std::move(p)}, {}, std::move(initial_inputs));
}

double InputSchedule::end_time() const {
    double t = pieces_.empty() ? 0.0 : pieces_.back().t1;
    if (!events_.empty()) t = std::max(t, events_.back().time);
    return t;
}

std::size_t InputSchedule::piece_at(double t, Side side) const {
    if (pieces_.empty()) throw Error("input schedule is empty");
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const bool inside = side == Side::Left ? t <= pieces_[i].t1 : t < pieces_[i].t1;
        if (inside) return i;
    }
    return pieces_.size() - 1;
}

std::vector<Vector> InputSchedule::jet(double t, std::size_t order, Side side) const {
    return jet_in(piece_at(t, side), t, order);
}

std::vector<Vector> InputSchedule::jet_in(std::size_t piece, double t, std::size_t order) const {
    return pieces_.at(piece).jet(t, order);
}

std::vector<double> InputSchedule::breakpoints() const {
    std::vector<double> out;
    for (const InputPiece& p : pieces_) {
        out.push_back(p.t0);
        out.push_back(p.t1);
    }
    for (const InputEvent& e : events_) out.push_back(e.time);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

InputPiece function_piece(double t0, double t1, std::function<Vector(double)> u) {
    InputPiece p;
    p.t0 = t0;
    p.t1 = t1;
    p.jet = [t0, t1, u = std::move(u)](double t, std::size_t order) {
        std::function<Vector(std::size_t, double)> deriv = [&](std::size_t k, double s) -> Vector {
            if (k == 0) return u(std::clamp(s, t0, t1));
            const double a = std::max(t0, s - kFdStep);
            const double b = std::min(t1, s + kFdStep);
            Vector lo = deriv(k - 1, a);
            const Vector hi = deriv(k - 1, b);
            for (std::size_t i = 0; i < lo.size(); ++i) lo[i] = (hi[i] - lo[i]) / (b - a);
            return lo;
        };
        std::vector<Vector> out;
        for (std::size_t k = 0; k <= order; ++k) out.push_back(deriv(k, t));
        return out;
    };
    return p;
}

InputPiece polynomial_piece(double t0, double t1, std::vector<Vector> coeffs) {
    InputPiece p;
    p.t0 = t0;
    p.t1 = t1;
    p.jet = [t0, coeffs = std::move(coeffs)](double t, std::size_t order) {
        const double s = t - t0;
        std::vector<Vector> out(order + 1, Vector(coeffs.size(), 0.0));
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            for (std::size_t k = 0; k <= order; ++k) {
                double acc = 0.0;
                for (std::size_t j = coeffs[i].size(); j-- > k;) {
                    double factor = coeffs[i][j];
                    for (std::size_t m = 0; m < k; ++m) factor *= static_cast<double>(j - m);
                    acc = acc * s + factor;
                }
                out[k][i] = acc;
            }
        }
        return out;
    };
    return p;
}

InputSchedule schedule_from_plan(const ModelDefinition& model, const Plan& plan) {
    std::vector<InputPiece> pieces;
    std::vector<InputEvent> events;
    for (const PlanPhase& phase : plan.phases) {
        const FlatMaps maps = model.maps(phase.state);
        const std::size_t order = std::max({maps.order_b(), maps.order_c(), std::size_t{1}});
        const TrajectorySegment segment = phase.segment;
        const double start = phase.start_time;
        pieces.push_back(function_piece(start, start + phase.duration, [maps, segment, start, order](double t) {
            const double tau = std::clamp(t - start, 0.0, segment.duration);
            return maps.inverse_input(evaluate_segment(segment, tau, order));
        }));
        if (phase.event) {
            for (const auto& [input, value] : phase.event->inputs) events.push_back({phase.event->time, input, value});
        }
    }
    return InputSchedule(std::move(pieces), std::move(events), plan.initial_inputs);
}

Path SimTrace::path() const {
    Path out;
    for (const TraceEvent& e : events) out.push_back(e.transition);
    return out;
}

namespace {

class Simulation {
public:
    Simulation(const ModelDefinition& model, const InputSchedule& schedule, const SimConfig& config)
        : model_(model), a_(model.automaton), schedule_(schedule), config_(config) {}

    SimTrace run(StateId d0, const Vector& x0) {
        static_cast<void>(a_.state(d0));
        if (x0.size() != model_.maps(d0).nx()) {
            throw Error("x0 has length " + std::to_string(x0.size()) + ", state '" + a_.state(d0).name + "' needs " +
                        std::to_string(model_.maps(d0).nx()));
        }
        if (!(config_.h > 0.0)) throw Error("step size must be positive");
        if (!(config_.tolerance > 0.0) || !(config_.tolerance < config_.h)) {
            throw Error("event tolerance must lie in (0, h)");
        }
        const double t_end = std::isnan(config_.t_end) ? schedule_.end_time() : config_.t_end;
        if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw Error("horizon must be finite and non-negative");
        cap_ = config_.chain_cap ? config_.chain_cap : a_.state_count();

        d_ = d0;
        x_ = x0;
        v_ = schedule_.initial_inputs();
        if (v_.empty()) v_.assign(a_.n_inputs(), false);
        if (v_.size() != a_.n_inputs()) {
            throw Error("schedule sets " + std::to_string(v_.size()) + " discrete inputs, model has " +
                        std::to_string(a_.n_inputs()));
        }

        std::vector<double> breaks;
        for (double b : schedule_.breakpoints()) {
            if (b > 0.0 && b < t_end) breaks.push_back(b);
        }
        breaks.push_back(t_end);

        double t = 0.0;
        settle(t);
        std::size_t bi = 0;
        while (t < t_end) {
            while (bi < breaks.size() && breaks[bi] <= t) ++bi;
            const double bp = breaks[bi];
            double next = bp - t <= config_.h * (1.0 + 1e-9) ? bp : t + config_.h;
            const std::size_t piece = schedule_.piece_at(0.5 * (t + next), Side::Right);
            Vector x1 = rk4(piece, t, x_, next - t);
            if (fires(piece, next, x1)) {
                double lo = t;
                double hi = next;
                while (hi - lo > config_.tolerance) {
                    const double mid = 0.5 * (lo + hi);
                    if (fires(piece, mid, rk4(piece, t, x_, mid - t))) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                next = hi;
                x1 = rk4(piece, t, x_, next - t);
            }
            t = next;
            x_ = std::move(x1);
            settle(t);
        }
        return std::move(trace_);
    }

private:
    std::vector<Vector> u_jet(std::size_t piece, double t) const {
        return schedule_.jet_in(piece, t, model_.maps(d_).order_a());
    }

    Vector output(double t, Side side) const {
        return model_.maps(d_).output(x_, schedule_.jet(t, model_.maps(d_).order_a(), side));
    }

    bool fires(std::size_t piece, double t, const Vector& x) const {
        const Vector z = model_.maps(d_).output(x, u_jet(piece, t));
        return active_transition(a_, d_, v_, z).has_value();
    }

    Vector rk4(std::size_t piece, double t0, const Vector& x, double dt) const {
        const FlatMaps& maps = model_.maps(d_);
        auto f = [&](double t, const Vector& y) { return maps.field(y, schedule_.jet_in(piece, t, 0)[0]); };
        const Vector k1 = f(t0, x);
        const Vector k2 = f(t0 + 0.5 * dt, axpy(x, 0.5 * dt, k1));
        const Vector k3 = f(t0 + 0.5 * dt, axpy(x, 0.5 * dt, k2));
        const Vector k4 = f(t0 + dt, axpy(x, dt, k3));
        Vector out = x;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        return out;
    }

    void record(double t, Side side) {
        TraceSample s;
        s.t = t;
        s.k = k_;
        s.state = d_;
        s.v = v_;
        s.x = x_;
        s.z = output(t, side);
        s.u = schedule_.jet(t, 0, side)[0];
        trace_.samples.push_back(std::move(s));
    }

    /// Everything that happens at instant t: sample the left limit, apply
    /// due input events, fire transitions until none is active, then sample
    /// the right limit if anything changed.
    void settle(double t) {
        record(t, Side::Left);
        bool changed = false;
        const auto& events = schedule_.events();
        while (next_event_ < events.size() && events[next_event_].time <= t + instant_slack(t)) {
            v_.at(events[next_event_].input) = events[next_event_].value;
            ++next_event_;
            changed = true;
        }
        Side side = Side::Left;
        for (std::size_t chain = 0;; ++chain) {
            const Vector z = output(t, side);
            const auto e = active_transition(a_, d_, v_, z);
            if (!e) break;
            if (chain == cap_) {
                throw ZenoError("more than " + std::to_string(cap_) + " switchings at t = " + format_double(t) +
                                ", last in state '" + a_.state(d_).name + "' at z = " + vector_text(z));
            }
            TraceEvent ev;
            ev.t = t;
            ev.chain = chain;
            ev.transition = *e;
            ev.x_before = x_;
            ev.z_before = z;
            ev.x_after = model_.jump(*e).apply(x_, z);
            x_ = ev.x_after;
            d_ = a_.transition(*e).tail;
            ++k_;
            trace_.events.push_back(std::move(ev));
            changed = true;
            side = Side::Right;
        }
        if (changed) record(t, Side::Right);
    }

    const ModelDefinition& model_;
    const Automaton& a_;
    const InputSchedule& schedule_;
    SimConfig config_;
    std::size_t cap_ = 0;
    StateId d_;
    Vector x_;
    InputVector v_;
    std::size_t k_ = 0;
    std::size_t next_event_ = 0;
    SimTrace trace_;
};

}  // namespace

SimTrace simulate(const ModelDefinition& model, StateId d0, const Vector& x0, const InputSchedule& schedule,
                  const SimConfig& config) {
    return Simulation(model, schedule, config).run(d0, x0);
}

bool PlanComparison::passed(double output_tolerance, double time_tolerance) const {
    return sequence_match && max_output_deviation <= output_tolerance && max_time_deviation <= time_tolerance;
}

PlanComparison compare_trace_to_plan(const ModelDefinition& model, const SimTrace& trace, const Plan& plan) {
    static_cast<void>(model);
    PlanComparison out;
    const Path sim = trace.path();
    const std::size_t common = std::min(sim.size(), plan.path.size());
    for (std::size_t i = 0; i < common; ++i) {
        if (sim[i] != plan.path[i]) {
            out.first_mismatch = i;
            break;
        }
        const double dev = std::abs(trace.events[i].t - plan.phases[i].event->time);
        out.time_deviation.push_back(dev);
        out.max_time_deviation = std::max(out.max_time_deviation, dev);
    }
    if (!out.first_mismatch && sim.size() != plan.path.size()) out.first_mismatch = common;
    out.sequence_match = !out.first_mismatch;

    out.phase_deviation.assign(plan.phases.size(), 0.0);
    if (plan.phases.empty()) return out;
    for (const TraceSample& s : trace.samples) {
        const std::size_t p = std::min(s.k, plan.phases.size() - 1);
        const PlanPhase& phase = plan.phases[p];
        if (s.z.size() != phase.segment.dim()) continue;
        const double tau = std::clamp(s.t - phase.start_time, 0.0, phase.duration);
        const Vector target = evaluate_segment(phase.segment, tau, 0).value();
        for (std::size_t i = 0; i < target.size(); ++i) {
            const double dev = std::abs(s.z[i] - target[i]);
            out.phase_deviation[p] = std::max(out.phase_deviation[p], dev);
            out.max_output_deviation = std::max(out.max_output_deviation, dev);
        }
    }
    return out;
}

SimTrace ideal_trace(const ModelDefinition& model, const Plan& plan, std::size_t samples_per_phase) {
    SimTrace out;
    const std::size_t n = std::max<std::size_t>(samples_per_phase, 1);
    for (std::size_t p = 0; p < plan.phases.size(); ++p) {
        const PlanPhase& phase = plan.phases[p];
        for (std::size_t j = 0; j <= n; ++j) {
            const double tau = phase.duration * static_cast<double>(j) / static_cast<double>(n);
            TraceSample s;
            s.t = phase.start_time + tau;
            s.k = p;
            s.state = phase.state;
            s.v = phase.inputs;
            s.x = plan_state(model, phase, tau);
            s.z = plan_output(model, phase, tau).value();
            s.u = plan_input(model, phase, tau);
            out.samples.push_back(std::move(s));
        }
        if (phase.event) {
            const PlanEvent& e = *phase.event;
            out.events.push_back({e.time, 0, e.transition, e.x_before, e.z_before, e.x_after});
        }
    }
    return out;
}

}  // namespace fha
