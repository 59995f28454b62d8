#include "fha/flat.hpp"

#include "fha/error.hpp"
#include "fha/format.hpp"

#include <algorithm>
#include <cmath>

namespace fha {
namespace {

void check_size(const Vector& v, std::size_t n, const char* what) {
    if (v.size() != n) {
        throw Error(std::string(what) + " has length " + std::to_string(v.size()) + ", expected " + std::to_string(n));
    }
}

}  // namespace

OutputJet OutputJet::constant(Vector z, std::size_t order) {
    OutputJet jet;
    const std::size_t n = z.size();
    jet.derivs.push_back(std::move(z));
    for (std::size_t k = 0; k < order; ++k) jet.derivs.emplace_back(n, 0.0);
    return jet;
}

Vector OutputJet::derivative(std::size_t k) const {
    if (k < derivs.size()) return derivs[k];
    return Vector(dim(), 0.0);
}

double safe_sqrt(double r) {
    if (r >= 0.0) return std::sqrt(r);
    if (r >= -1e-12) return 0.0;
    throw DomainError("square root of negative value " + format_double(r));
}

FlatMaps::FlatMaps(Spec spec) : spec_(std::move(spec)) {
    if (spec_.nz != spec_.nu) {
        throw ModelError("flat output dimension " + std::to_string(spec_.nz) + " differs from input dimension " +
                         std::to_string(spec_.nu));
    }
    if (!spec_.output || !spec_.inverse_state || !spec_.inverse_input || !spec_.field || !spec_.initial_output) {
        throw ModelError("flat maps are incomplete");
    }
}

Vector FlatMaps::output(const Vector& x, const std::vector<Vector>& u_jet) const {
    check_size(x, spec_.nx, "state");
    if (u_jet.size() < spec_.order_a + 1) throw Error("input jet too short for the output map");
    Vector z = spec_.output(x, u_jet);
    check_size(z, spec_.nz, "flat output");
    return z;
}

Vector FlatMaps::inverse_state(const OutputJet& jet) const {
    check_size(jet.value(), spec_.nz, "flat output");
    if (jet.order() < spec_.order_b) throw Error("output jet too short for the state map");
    Vector x = spec_.inverse_state(jet);
    check_size(x, spec_.nx, "state");
    return x;
}

Vector FlatMaps::inverse_input(const OutputJet& jet) const {
    check_size(jet.value(), spec_.nz, "flat output");
    if (jet.order() < spec_.order_c) throw Error("output jet too short for the input map");
    Vector u = spec_.inverse_input(jet);
    check_size(u, spec_.nu, "input");
    return u;
}

Vector FlatMaps::field(const Vector& x, const Vector& u) const {
    check_size(x, spec_.nx, "state");
    check_size(u, spec_.nu, "input");
    Vector dx = spec_.field(x, u);
    check_size(dx, spec_.nx, "state derivative");
    return dx;
}

Vector FlatMaps::initial_output(const Vector& x, const Vector& hint) const {
    check_size(x, spec_.nx, "state");
    check_size(hint, spec_.nz, "output hint");
    Vector z = spec_.initial_output(x, hint);
    check_size(z, spec_.nz, "flat output");
    return z;
}

std::size_t TrajectorySegment::degree() const {
    std::size_t d = 0;
    for (const Vector& c : coeffs) {
        for (std::size_t k = c.size(); k-- > 0;) {
            if (c[k] != 0.0) {
                d = std::max(d, k);
                break;
            }
        }
    }
    return d;
}

TrajectorySegment plan_segment(const OutputJet& start, const OutputJet& end, double duration, int degree) {
    if (!(duration > 0.0) || !std::isfinite(duration)) {
        throw Error("segment duration must be positive, got " + format_double(duration));
    }
    if (degree != 1 && degree != 3) throw Error("segment degree must be 1 or 3, got " + std::to_string(degree));
    if (start.dim() != end.dim()) throw Error("segment boundary jets differ in dimension");

    const std::size_t n = start.dim();
    const double T = duration;
    TrajectorySegment s;
    s.duration = T;
    s.coeffs.resize(n);
    const Vector v0 = start.derivative(1);
    const Vector v1 = end.derivative(1);
    for (std::size_t i = 0; i < n; ++i) {
        const double z0 = start.value()[i];
        const double z1 = end.value()[i];
        if (degree == 1) {
            s.coeffs[i] = {z0, (z1 - z0) / T};
        } else {
            const double a2 = (3.0 * (z1 - z0) / T - 2.0 * v0[i] - v1[i]) / T;
            const double a3 = (2.0 * (z0 - z1) / T + v0[i] + v1[i]) / (T * T);
            s.coeffs[i] = {z0, v0[i], a2, a3};
        }
    }
    s.start = evaluate_segment(s, 0.0, 1);
    s.end = evaluate_segment(s, T, 1);
    return s;
}

OutputJet evaluate_segment(const TrajectorySegment& s, double tau, std::size_t order) {
    const double slack = 1e-9 * std::max(1.0, s.duration);
    if (!(tau >= -slack && tau <= s.duration + slack)) {
        throw Error("segment time " + format_double(tau) + " outside [0, " + format_double(s.duration) + "]");
    }
    tau = std::clamp(tau, 0.0, s.duration);
    OutputJet jet;
    jet.derivs.assign(order + 1, Vector(s.dim(), 0.0));
    for (std::size_t i = 0; i < s.dim(); ++i) {
        Vector c = s.coeffs[i];
        for (std::size_t k = 0; k <= order; ++k) {
            double acc = 0.0;
            for (std::size_t j = c.size(); j-- > 0;) acc = acc * tau + c[j];
            jet.derivs[k][i] = acc;
            // Differentiate the polynomial in place.
            for (std::size_t j = 1; j < c.size(); ++j) c[j - 1] = c[j] * static_cast<double>(j);
            if (!c.empty()) c.back() = 0.0;
        }
    }
    return jet;
}

double flatness_consistency(const FlatMaps& m, const TrajectorySegment& s, std::size_t samples) {
    constexpr double h = 1e-5;
    if (samples == 0 || s.duration <= 2.0 * h) return 0.0;
    const std::size_t order = std::max({m.order_b(), m.order_c(), std::size_t{1}});
    double worst = 0.0;
    for (std::size_t j = 0; j < samples; ++j) {
        const double frac = samples == 1 ? 0.5 : static_cast<double>(j) / static_cast<double>(samples - 1);
        const double tau = h + (s.duration - 2.0 * h) * frac;
        const Vector x = m.inverse_state(evaluate_segment(s, tau, order));
        const Vector xp = m.inverse_state(evaluate_segment(s, tau + h, order));
        const Vector xm = m.inverse_state(evaluate_segment(s, tau - h, order));
        const Vector u = m.inverse_input(evaluate_segment(s, tau, order));
        const Vector dx = m.field(x, u);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double fd = (xp[i] - xm[i]) / (2.0 * h);
            worst = std::max(worst, std::abs(fd - dx[i]));
        }
    }
    return worst;
}

}  // namespace fha
