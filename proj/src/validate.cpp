#include "fha/error.hpp"
#include "fha/format.hpp"
#include "fha/models.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace fha {
namespace {

constexpr std::size_t kSegmentsPerState = 10;
constexpr std::size_t kSamplesPerSegment = 50;

double draw(std::mt19937_64& rng, const Interval& iv) {
    return std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng);
}

/// Residual over seeded rest-to-rest cubic segments; these stay between
/// their endpoints, hence inside the sampling box.
double seeded_residual(const ModelDefinition& m, StateId d, std::uint64_t seed) {
    const Box box = sampling_box(m, d);
    std::mt19937_64 rng(seed + d.value);
    double worst = 0.0;
    for (std::size_t k = 0; k < kSegmentsPerState; ++k) {
        Vector a(box.size());
        Vector b(box.size());
        for (std::size_t i = 0; i < box.size(); ++i) {
            a[i] = draw(rng, box[i]);
            b[i] = draw(rng, box[i]);
        }
        const double T = std::uniform_real_distribution<double>(1.0, 20.0)(rng);
        const TrajectorySegment s = plan_segment(OutputJet::constant(a, 1), OutputJet::constant(b, 1), T, 3);
        worst = std::max(worst, flatness_consistency(m.maps(d), s, kSamplesPerSegment));
    }
    return worst;
}

std::string inputs_text(const std::map<std::size_t, bool>& inputs, const std::vector<std::string>& names) {
    std::string s;
    for (const auto& [id, value] : inputs) {
        if (!s.empty()) s += ", ";
        s += (id < names.size() ? names[id] : "v" + std::to_string(id)) + "=" + (value ? "1" : "0");
    }
    return "{" + s + "}";
}

}  // namespace

bool ValidationReport::passed() const {
    if (!strongly_connected || !conflicts.empty() || !guard_errors.empty() || !jump_errors.empty()) return false;
    return std::all_of(states.begin(), states.end(), [this](const StateCheck& s) {
        return s.error.empty() && s.square && s.residual <= residual_tolerance;
    });
}

ValidationReport validate_fha(const ModelDefinition& m, std::uint64_t seed) {
    const Automaton& a = m.automaton;
    ValidationReport r;
    r.strongly_connected = is_strongly_connected(adjacency(a));
    r.conflicts = check_determinism(a);
    for (const Transition& t : a.transitions()) {
        try {
            static_cast<void>(guard_inverse(a, t.id));
        } catch (const GuardError& e) {
            r.guard_errors.push_back(e.what());
        }
        const JumpMap& j = m.jump(t.id);
        const FlatMaps& head = m.maps(t.head);
        const FlatMaps& tail = m.maps(t.tail);
        if (j.in_dim != head.nx() || j.out_dim() != tail.nx() || j.z_dim != head.nz()) {
            r.jump_errors.push_back("jump of '" + t.name + "' does not map " + a.state(t.head).name + " to " +
                                    a.state(t.tail).name);
        }
    }
    for (const DiscreteState& s : a.states()) {
        StateCheck c;
        c.state = s.id;
        const FlatMaps& maps = m.maps(s.id);
        c.square = maps.nz() == maps.nu() && maps.nz() == s.output_dim;
        try {
            const InvariantSets inv = invariant_sets(a, s.id);
            c.invariant_inputs = inv.inputs;
            c.invariant_outputs = inv.outputs.str();
            c.residual = seeded_residual(m, s.id, seed);
        } catch (const Error& e) {
            c.error = e.what();
        }
        r.states.push_back(std::move(c));
    }
    return r;
}

std::string format_report(const ValidationReport& r, const ModelDefinition& m) {
    const Automaton& a = m.automaton;
    auto yes = [](bool b) { return b ? "yes" : "no"; };
    std::ostringstream out;
    out << "model: " << m.family << " (" << a.state_count() << " states, " << a.transition_count()
        << " transitions)\n";
    out << "strongly connected: " << yes(r.strongly_connected) << "\n";
    out << "deterministic: " << yes(r.deterministic()) << "\n";
    for (const DeterminismConflict& c : r.conflicts) {
        out << "  conflict: " << a.transition(c.first).name << " / " << a.transition(c.second).name << ": "
            << c.reason << "\n";
    }
    out << "guards invertible: " << yes(r.guard_errors.empty()) << "\n";
    for (const std::string& e : r.guard_errors) out << "  " << e << "\n";
    for (const StateCheck& c : r.states) {
        out << "state " << a.state(c.state).name << ": ";
        if (!c.error.empty()) {
            out << "error: " << c.error << "\n";
            continue;
        }
        out << "V_inv " << inputs_text(c.invariant_inputs, m.input_names) << ", Z_inv " << c.invariant_outputs
            << ", nz=nu " << yes(c.square) << ", residual " << format_double(c.residual) << "\n";
    }
    out << "jumps consistent: " << yes(r.jump_errors.empty()) << "\n";
    for (const std::string& e : r.jump_errors) out << "  " << e << "\n";
    out << "result: " << (r.passed() ? "PASS" : "FAIL") << "\n";
    return out.str();
}

}  // namespace fha
