#include "fha/models.hpp"

#include "fha/error.hpp"
#include "fha/format.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace fha {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const char* const kOneTank = "one_tank";
const char* const kDcNetwork = "dc_network";

double lookup(const ParameterMap& p, const std::string& name) {
    auto it = p.find(name);
    if (it == p.end()) throw ModelError("missing parameter '" + name + "'");
    if (!std::isfinite(it->second)) throw ModelError("parameter '" + name + "' must be finite");
    return it->second;
}

void require(bool ok, const std::string& name, const char* rule, double value) {
    if (!ok) throw ModelError("parameter '" + name + "' must be " + rule + ", got " + format_double(value));
}

ParameterMap merge_overrides(const std::string& family, ParameterMap base, const ParameterMap& overrides) {
    for (const auto& [name, value] : overrides) {
        auto it = base.find(name);
        if (it == base.end()) throw ModelError("unknown parameter '" + name + "' for family '" + family + "'");
        it->second = value;
    }
    return base;
}

OneTankParams tank_params(const ParameterMap& m) {
    OneTankParams p;
    p.l0 = lookup(m, "l0");
    p.c_out = lookup(m, "c_out");
    p.c_v1 = lookup(m, "c_v1");
    p.c_ovf = lookup(m, "c_ovf");
    p.l1_0 = lookup(m, "l1_0");
    require(p.l0 > 0.0, "l0", "positive", p.l0);
    require(p.c_out >= 0.0, "c_out", "non-negative", p.c_out);
    require(p.c_v1 >= 0.0, "c_v1", "non-negative", p.c_v1);
    require(p.c_ovf >= 0.0, "c_ovf", "non-negative", p.c_ovf);
    require(p.l1_0 >= 0.0, "l1_0", "non-negative", p.l1_0);
    return p;
}

ParameterMap tank_map(const OneTankParams& p) {
    return {{"l0", p.l0}, {"c_out", p.c_out}, {"c_v1", p.c_v1}, {"c_ovf", p.c_ovf}, {"l1_0", p.l1_0}};
}

DcNetworkParams network_params(const ParameterMap& m) {
    DcNetworkParams p;
    p.R = lookup(m, "R");
    p.C = lookup(m, "C");
    p.L = lookup(m, "L");
    p.R_L1 = lookup(m, "R_L1");
    p.R_L2 = lookup(m, "R_L2");
    p.v0 = lookup(m, "v0");
    p.i0 = lookup(m, "i0");
    p.v_L1_0 = lookup(m, "v_L1_0");
    p.i_L2_0 = lookup(m, "i_L2_0");
    for (const char* name : {"R", "C", "L", "R_L1", "R_L2", "v0", "i0"}) {
        require(m.at(name) > 0.0, name, "positive", m.at(name));
    }
    require(p.v_L1_0 >= 0.0, "v_L1_0", "non-negative", p.v_L1_0);
    require(p.i_L2_0 >= 0.0, "i_L2_0", "non-negative", p.i_L2_0);
    return p;
}

ParameterMap network_map(const DcNetworkParams& p) {
    return {{"R", p.R},       {"C", p.C},   {"L", p.L},   {"R_L1", p.R_L1},     {"R_L2", p.R_L2},
            {"v0", p.v0},     {"i0", p.i0}, {"v_L1_0", p.v_L1_0}, {"i_L2_0", p.i_L2_0}};
}

bool is_initial_parameter(const std::string& name) {
    return name == "l1_0" || name == "v_L1_0" || name == "i_L2_0";
}

DiscreteState make_state(std::size_t id, std::string name, const FamilyShape& shape,
                         std::map<std::size_t, bool> invariant) {
    DiscreteState s;
    s.id = StateId(id);
    s.name = std::move(name);
    s.output_dim = shape.outputs.size();
    s.output_domain = shape.output_domain;
    s.invariant_inputs = std::move(invariant);
    return s;
}

Transition make_transition(std::size_t id, std::size_t head, std::size_t tail, std::vector<GuardAtom> atoms) {
    Transition t;
    t.id = TransitionId(id);
    t.name = "e" + std::to_string(id + 1);
    t.head = StateId(head);
    t.tail = StateId(tail);
    t.priority = 0;
    t.guard.atoms = std::move(atoms);
    return t;
}

bool invariant_input(const InvariantSets& inv, std::size_t input, const DiscreteState& s) {
    auto it = inv.inputs.find(input);
    if (it == inv.inputs.end()) {
        throw ModelError("state '" + s.name + "': discrete invariant does not fix input " + std::to_string(input));
    }
    return it->second;
}

/// Tank outflow for level l with the valve state and overflow flag of one
/// discrete state.  The overflow term uses H(l - l0) = 0 at equality.
double tank_drain(const OneTankParams& p, bool valve, bool overflow, double l) {
    const double root = safe_sqrt(l);
    double out = p.c_out * root;
    if (valve) out += p.c_v1 * root;
    if (overflow && l > p.l0) out += p.c_ovf * safe_sqrt(l - p.l0);
    return out;
}

FlatMaps tank_maps(const OneTankParams& p, bool valve, bool overflow) {
    FlatMaps::Spec s;
    s.nx = s.nu = s.nz = 1;
    s.order_a = 0;
    s.order_b = 0;
    s.order_c = 1;
    s.output = [](const Vector& x, const std::vector<Vector>&) { return x; };
    s.inverse_state = [](const OutputJet& jet) { return jet.value(); };
    s.inverse_input = [p, valve, overflow](const OutputJet& jet) {
        return Vector{jet.derivs[1][0] + tank_drain(p, valve, overflow, jet.derivs[0][0])};
    };
    s.field = [p, valve, overflow](const Vector& x, const Vector& u) {
        return Vector{u[0] - tank_drain(p, valve, overflow, x[0])};
    };
    s.initial_output = [](const Vector& x, const Vector&) { return x; };
    return FlatMaps(std::move(s));
}

/// One (v1, v2) block of the network.  With v1 = 0 the capacitor is cut off,
/// x = [i_L2] and v_L1 follows u1 algebraically; with v1 = 1, x = [v_C, i_L2]
/// and v_C = v_L1.
FlatMaps network_maps(const DcNetworkParams& p, bool v1, bool v2) {
    const double k = p.R / p.R_L1 + 1.0;
    const double s2 = v2 ? 1.0 : 0.0;
    FlatMaps::Spec s;
    s.nu = s.nz = 2;
    s.order_a = 0;
    s.order_b = 0;
    s.order_c = 1;
    if (!v1) {
        s.nx = 1;
        auto load_voltage = [p, k, s2](double u1, double i) { return (u1 + s2 * p.R * i) / k; };
        s.output = [load_voltage](const Vector& x, const std::vector<Vector>& u) {
            return Vector{load_voltage(u[0][0], x[0]), x[0]};
        };
        s.inverse_state = [](const OutputJet& jet) { return Vector{jet.derivs[0][1]}; };
        s.inverse_input = [p, k, s2](const OutputJet& jet) {
            const Vector& z = jet.derivs[0];
            const Vector& dz = jet.derivs[1];
            return Vector{k * z[0] - s2 * p.R * z[1], p.L * dz[1] + p.R_L2 * z[1] + s2 * z[0]};
        };
        s.field = [p, s2, load_voltage](const Vector& x, const Vector& u) {
            const double v_l1 = load_voltage(u[0], x[0]);
            return Vector{(u[1] - p.R_L2 * x[0] - s2 * v_l1) / p.L};
        };
        s.initial_output = [](const Vector& x, const Vector& hint) { return Vector{hint[0], x[0]}; };
    } else {
        s.nx = 2;
        s.output = [](const Vector& x, const std::vector<Vector>&) { return x; };
        s.inverse_state = [](const OutputJet& jet) { return jet.value(); };
        s.inverse_input = [p, k, s2](const OutputJet& jet) {
            const Vector& z = jet.derivs[0];
            const Vector& dz = jet.derivs[1];
            return Vector{p.R * p.C * dz[0] + k * z[0] - s2 * p.R * z[1], p.L * dz[1] + p.R_L2 * z[1] + s2 * z[0]};
        };
        s.field = [p, s2](const Vector& x, const Vector& u) {
            const double vc = x[0];
            const double i = x[1];
            return Vector{((u[0] - vc) / p.R - vc / p.R_L1 + s2 * i) / p.C, (u[1] - p.R_L2 * i - s2 * vc) / p.L};
        };
        s.initial_output = [](const Vector& x, const Vector&) { return x; };
    }
    return FlatMaps(std::move(s));
}

/// Jump between network blocks: closing v1 charges the capacitor state to
/// the load voltage, opening it drops v_C; v2 toggles keep x.
JumpMap network_jump(bool head_v1, bool tail_v1) {
    if (head_v1 == tail_v1) return JumpMap::identity(head_v1 ? 2 : 1, 2);
    JumpMap j;
    j.z_dim = 2;
    if (!head_v1) {
        j.in_dim = 1;
        j.a = {{0.0}, {1.0}};
        j.b = {{1.0, 0.0}, {0.0, 0.0}};
    } else {
        j.in_dim = 2;
        j.a = {{0.0, 1.0}};
        j.b = {{0.0, 0.0}};
    }
    return j;
}

Automaton tank_automaton(const OneTankParams& p) {
    const FamilyShape shape = family_shape(kOneTank);
    std::vector<DiscreteState> states{
        make_state(0, "d1", shape, {{0, false}}),
        make_state(1, "d2", shape, {{0, true}}),
        make_state(2, "d3", shape, {{0, false}}),
        make_state(3, "d4", shape, {{0, true}}),
    };
    const GuardAtom below = GuardAtom::output(0, Relation::LessEqual, p.l0);
    const GuardAtom above = GuardAtom::output(0, Relation::Greater, p.l0);
    const GuardAtom closed = GuardAtom::input(0, false);
    const GuardAtom open = GuardAtom::input(0, true);
    std::vector<Transition> ts{
        make_transition(0, 0, 1, {below, open}),    make_transition(1, 0, 2, {above, closed}),
        make_transition(2, 0, 3, {above, open}),    make_transition(3, 1, 0, {below, closed}),
        make_transition(4, 1, 2, {above, closed}),  make_transition(5, 1, 3, {above, open}),
        make_transition(6, 2, 0, {below, closed}),  make_transition(7, 2, 1, {below, open}),
        make_transition(8, 2, 3, {above, open}),    make_transition(9, 3, 0, {below, closed}),
        make_transition(10, 3, 1, {below, open}),   make_transition(11, 3, 2, {above, closed}),
    };
    return Automaton(std::move(states), 1, std::move(ts), StateId(0));
}

Automaton network_automaton(const DcNetworkParams& p) {
    const FamilyShape shape = family_shape(kDcNetwork);
    std::vector<DiscreteState> states{
        make_state(0, "d1", shape, {{0, false}, {1, false}}),
        make_state(1, "d2", shape, {{0, true}, {1, false}}),
        make_state(2, "d3", shape, {{0, false}, {1, true}}),
        make_state(3, "d4", shape, {{0, true}, {1, true}}),
    };
    const GuardAtom v_high = GuardAtom::output(0, Relation::GreaterEqual, p.v0);
    const GuardAtom v_low = GuardAtom::output(0, Relation::Less, p.v0);
    const GuardAtom i_high = GuardAtom::output(1, Relation::GreaterEqual, p.i0);
    const GuardAtom i_low = GuardAtom::output(1, Relation::Less, p.i0);
    auto v1 = [](bool on) { return GuardAtom::input(0, on); };
    auto v2 = [](bool on) { return GuardAtom::input(1, on); };
    // Every guard fixes both switches to the values of its tail state.
    std::vector<Transition> ts{
        make_transition(0, 0, 1, {v_high, v1(true), v2(false)}),
        make_transition(1, 0, 2, {i_high, v2(true), v1(false)}),
        make_transition(2, 0, 3, {v_high, v1(true), i_high, v2(true)}),
        make_transition(3, 1, 0, {v_low, v1(false), v2(false)}),
        make_transition(4, 1, 2, {v_low, v1(false), i_high, v2(true)}),
        make_transition(5, 1, 3, {i_high, v2(true), v1(true)}),
        make_transition(6, 2, 0, {i_low, v1(false), v2(false)}),
        make_transition(7, 2, 1, {v_high, v1(true), i_low, v2(false)}),
        make_transition(8, 2, 3, {v_high, v1(true), v2(true)}),
        make_transition(9, 3, 0, {v_low, v1(false), i_low, v2(false)}),
        make_transition(10, 3, 1, {i_low, v2(false), v1(true)}),
        make_transition(11, 3, 2, {v_low, v1(false), v2(true)}),
    };
    return Automaton(std::move(states), 2, std::move(ts), StateId(0));
}

InitialCondition default_initial(const std::string& family, const ParameterMap& params, const Automaton& a,
                                 const std::vector<FlatMaps>& flat, StateId state) {
    Vector outputs;
    if (family == kOneTank) {
        outputs = {lookup(params, "l1_0")};
    } else {
        outputs = {lookup(params, "v_L1_0"), lookup(params, "i_L2_0")};
    }
    static_cast<void>(a.state(state));
    // Phi needs only the value for both families.
    const Vector x0 = flat[state.value].inverse_state(OutputJet::constant(outputs, 1));
    return {state, x0, outputs};
}

}  // namespace

JumpMap JumpMap::identity(std::size_t nx, std::size_t nz) {
    JumpMap j;
    j.in_dim = nx;
    j.z_dim = nz;
    j.a.assign(nx, Vector(nx, 0.0));
    j.b.assign(nx, Vector(nz, 0.0));
    for (std::size_t i = 0; i < nx; ++i) j.a[i][i] = 1.0;
    return j;
}

Vector JumpMap::apply(const Vector& x, const Vector& z) const {
    if (x.size() != in_dim || z.size() != z_dim) throw Error("jump map applied to vectors of the wrong size");
    Vector out(out_dim(), 0.0);
    for (std::size_t r = 0; r < out_dim(); ++r) {
        for (std::size_t c = 0; c < in_dim; ++c) out[r] += a[r][c] * x[c];
        for (std::size_t c = 0; c < z_dim; ++c) out[r] += b[r][c] * z[c];
    }
    return out;
}

std::vector<std::string> model_families() {
    return {kOneTank, kDcNetwork};
}

FamilyShape family_shape(const std::string& family) {
    if (family == kOneTank) return {{"v1"}, {"l1"}, {Interval::at_least(0.0)}};
    if (family == kDcNetwork) return {{"v1", "v2"}, {"v_L1", "i_L2"}, whole_box(2)};
    throw ModelError("unknown model family '" + family + "'");
}

ParameterMap default_parameters(const std::string& family) {
    if (family == kOneTank) return tank_map(OneTankParams{});
    if (family == kDcNetwork) return network_map(DcNetworkParams{});
    throw ModelError("unknown model family '" + family + "'");
}

ModelDefinition one_tank(const OneTankParams& p) {
    const ParameterMap params = tank_map(p);
    const OneTankParams checked = tank_params(params);
    return attach_dynamics(kOneTank, params, tank_automaton(checked), {"v1"}, {"l1"});
}

ModelDefinition dc_network(const DcNetworkParams& p) {
    const ParameterMap params = network_map(p);
    const DcNetworkParams checked = network_params(params);
    return attach_dynamics(kDcNetwork, params, network_automaton(checked), {"v1", "v2"}, {"v_L1", "i_L2"});
}

ModelDefinition build_model(const std::string& family, const ParameterMap& overrides) {
    const ParameterMap params = merge_overrides(family, default_parameters(family), overrides);
    if (family == kOneTank) return one_tank(tank_params(params));
    return dc_network(network_params(params));
}

ModelDefinition attach_dynamics(const std::string& family, const ParameterMap& parameters, Automaton automaton,
                                std::vector<std::string> input_names, std::vector<std::string> output_names,
                                std::optional<InitialCondition> initial) {
    const FamilyShape shape = family_shape(family);
    const ParameterMap params = merge_overrides(family, default_parameters(family), parameters);
    if (automaton.n_inputs() != shape.inputs.size()) {
        throw ModelError("family '" + family + "' expects " + std::to_string(shape.inputs.size()) + " inputs");
    }
    for (const DiscreteState& s : automaton.states()) {
        if (s.output_dim != shape.outputs.size()) {
            throw ModelError("state '" + s.name + "': family '" + family + "' expects " +
                             std::to_string(shape.outputs.size()) + " outputs");
        }
    }
    if (input_names.size() != shape.inputs.size()) input_names = shape.inputs;
    if (output_names.size() != shape.outputs.size()) output_names = shape.outputs;

    ModelDefinition m;
    m.family = family;
    m.parameters = params;
    m.input_names = std::move(input_names);
    m.output_names = std::move(output_names);

    // Discrete inputs that select each state's dynamics.
    std::vector<std::vector<bool>> keys;
    if (family == kOneTank) {
        const OneTankParams p = tank_params(params);
        const Region above = Region::from_box({Interval{p.l0, kInf, false, false}});
        for (const DiscreteState& s : automaton.states()) {
            const InvariantSets inv = invariant_sets(automaton, s.id);
            const bool valve = invariant_input(inv, 0, s);
            const bool overflow = inv.outputs.subset_of(above);
            m.flat.push_back(tank_maps(p, valve, overflow));
            keys.push_back({valve});
        }
        m.jumps.assign(automaton.transition_count(), JumpMap::identity(1, 1));
        m.nominal_outputs = {Interval::closed(0.5, 10.0)};
        m.margin_scale = {1.0};
        m.units = {{"time", "min"}, {"l1", "m"}, {"u", "m/min"}};
    } else {
        const DcNetworkParams p = network_params(params);
        for (const DiscreteState& s : automaton.states()) {
            const InvariantSets inv = invariant_sets(automaton, s.id);
            const bool v1 = invariant_input(inv, 0, s);
            const bool v2 = invariant_input(inv, 1, s);
            m.flat.push_back(network_maps(p, v1, v2));
            keys.push_back({v1, v2});
        }
        for (const Transition& t : automaton.transitions()) {
            m.jumps.push_back(network_jump(keys[t.head.value][0], keys[t.tail.value][0]));
        }
        m.nominal_outputs = {Interval::closed(0.0, 12.0), Interval::closed(0.0, 1.0)};
        m.margin_scale = {1.0, 1.0};
        m.units = {{"time", "s"}, {"v_L1", "V"}, {"i_L2", "mA"}, {"u", "V"}};
    }

    if (initial) {
        const FlatMaps& maps = m.flat.at(initial->state.value);
        if (initial->x0.size() != maps.nx()) {
            throw ModelError("initial state vector has length " + std::to_string(initial->x0.size()) + ", state '" +
                             automaton.state(initial->state).name + "' needs " + std::to_string(maps.nx()));
        }
        if (initial->outputs.size() != maps.nz()) {
            initial->outputs = default_initial(family, params, automaton, m.flat, initial->state).outputs;
        }
        initial->outputs = maps.initial_output(initial->x0, initial->outputs);
        m.initial = *initial;
    } else {
        m.initial = default_initial(family, params, automaton, m.flat, automaton.initial());
    }
    m.automaton = std::move(automaton);
    return m;
}

ModelDefinition with_parameters(const ModelDefinition& m, const ParameterMap& overrides) {
    const ParameterMap params = merge_overrides(m.family, m.parameters, overrides);
    bool reset_initial = false;
    for (const auto& [name, value] : overrides) reset_initial = reset_initial || is_initial_parameter(name);
    std::optional<InitialCondition> initial;
    if (!reset_initial) initial = m.initial;
    ModelDefinition out = attach_dynamics(m.family, params, m.automaton, m.input_names, m.output_names, initial);
    if (reset_initial) {
        out.initial = default_initial(out.family, out.parameters, out.automaton, out.flat, m.initial.state);
    }
    return out;
}

Box sampling_box(const ModelDefinition& m, StateId d) {
    const Region inv = invariant_sets(m.automaton, d).outputs.normalized();
    for (const Box& b : inv.boxes()) {
        Box box = box_intersect(b, m.nominal_outputs);
        if (box_empty(box)) continue;
        for (Interval& iv : box) {
            const double width = iv.hi - iv.lo;
            if (!iv.lo_closed) iv.lo += 1e-3 * width;
            if (!iv.hi_closed) iv.hi -= 1e-3 * width;
            iv.lo_closed = iv.hi_closed = true;
        }
        if (!box_empty(box)) return box;
    }
    throw ModelError("state '" + m.automaton.state(d).name + "': invariant misses the nominal output region");
}

}  // namespace fha
