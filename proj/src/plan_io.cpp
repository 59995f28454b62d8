#include "fha/plan_io.hpp"

#include "fha/error.hpp"
#include "fha/format.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace fha {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json bits(const InputVector& v) {
    ordered_json out = ordered_json::array();
    for (bool b : v) out.push_back(b ? 1 : 0);
    return out;
}

ordered_json assignment(const ModelDefinition& m, const std::map<std::size_t, bool>& inputs) {
    ordered_json out = ordered_json::object();
    for (const auto& [id, value] : inputs) out[m.input_names.at(id)] = value ? 1 : 0;
    return out;
}

std::string assignment_text(const ModelDefinition& m, const std::map<std::size_t, bool>& inputs) {
    std::string s;
    for (const auto& [id, value] : inputs) {
        if (!s.empty()) s += ';';
        s += m.input_names.at(id) + "=" + (value ? "1" : "0");
    }
    return s;
}

const json& field(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw PlanError(path + "." + key + ": missing");
    return *it;
}

Vector numbers(const json& j, const std::string& path) {
    if (!j.is_array()) throw PlanError(path + ": expected an array of numbers");
    Vector out;
    for (const json& x : j) {
        if (!x.is_number()) throw PlanError(path + ": expected an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

InputVector bit_vector(const json& j, const std::string& path) {
    if (!j.is_array()) throw PlanError(path + ": expected an array of 0/1");
    InputVector out;
    for (const json& x : j) {
        if (!x.is_number_integer()) throw PlanError(path + ": expected an array of 0/1");
        out.push_back(x.get<int>() != 0);
    }
    return out;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw PlanError(path + ": expected a number");
    return j.get<double>();
}

std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) throw PlanError(path + ": expected a string");
    return j.get<std::string>();
}

StateId state_named(const ModelDefinition& m, const std::string& name, const std::string& path) {
    auto id = m.automaton.find_state(name);
    if (!id) throw PlanError(path + ": unknown state '" + name + "'");
    return *id;
}

}  // namespace

std::string plan_to_json(const ModelDefinition& model, const Plan& plan) {
    const Automaton& a = model.automaton;
    ordered_json root;
    root["model"] = plan.family;
    root["d0"] = a.state(plan.initial_state).name;
    root["x0"] = plan.x0;
    root["eps"] = plan.epsilon;
    root["degree"] = plan.degree;
    root["initial_inputs"] = bits(plan.initial_inputs);
    ordered_json phases = ordered_json::array();
    for (const PlanPhase& p : plan.phases) {
        ordered_json jp;
        jp["state"] = a.state(p.state).name;
        jp["start"] = p.start_time;
        jp["duration"] = p.duration;
        jp["x0"] = p.x0;
        jp["z0"] = p.start_jet.value();
        jp["inputs"] = bits(p.inputs);
        jp["coefficients"] = p.segment.coeffs;
        if (p.event) {
            const PlanEvent& e = *p.event;
            ordered_json je;
            je["time"] = e.time;
            je["transition"] = a.transition(e.transition).name;
            je["inputs"] = assignment(model, e.inputs);
            je["x_before"] = e.x_before;
            je["z_before"] = e.z_before;
            je["x_after"] = e.x_after;
            jp["event"] = je;
        } else {
            jp["event"] = nullptr;
        }
        phases.push_back(jp);
    }
    root["phases"] = phases;
    return root.dump(2) + "\n";
}

Plan plan_from_json(const ModelDefinition& model, const std::string& document) {
    json root;
    try {
        root = json::parse(document);
    } catch (const json::parse_error& e) {
        throw PlanError(std::string("$: ") + e.what());
    }
    if (!root.is_object()) throw PlanError("$: expected an object");
    const Automaton& a = model.automaton;
    Plan plan;
    plan.family = text(field(root, "model", "$"), "$.model");
    if (plan.family != model.family) {
        throw PlanError("$.model: plan is for '" + plan.family + "', model is '" + model.family + "'");
    }
    plan.initial_state = state_named(model, text(field(root, "d0", "$"), "$.d0"), "$.d0");
    plan.x0 = numbers(field(root, "x0", "$"), "$.x0");
    plan.epsilon = number(field(root, "eps", "$"), "$.eps");
    plan.degree = static_cast<int>(number(field(root, "degree", "$"), "$.degree"));
    plan.initial_inputs = bit_vector(field(root, "initial_inputs", "$"), "$.initial_inputs");

    const json& phases = field(root, "phases", "$");
    if (!phases.is_array() || phases.empty()) throw PlanError("$.phases: expected a non-empty array");
    plan.sequence.push_back(plan.initial_state);
    for (std::size_t i = 0; i < phases.size(); ++i) {
        const std::string path = "$.phases[" + std::to_string(i) + "]";
        const json& jp = phases[i];
        PlanPhase p;
        p.state = state_named(model, text(field(jp, "state", path), path + ".state"), path + ".state");
        p.start_time = number(field(jp, "start", path), path + ".start");
        p.duration = number(field(jp, "duration", path), path + ".duration");
        p.x0 = numbers(field(jp, "x0", path), path + ".x0");
        p.start_jet = OutputJet::constant(numbers(field(jp, "z0", path), path + ".z0"), 1);
        p.inputs = bit_vector(field(jp, "inputs", path), path + ".inputs");
        const json& coeffs = field(jp, "coefficients", path);
        if (!coeffs.is_array()) throw PlanError(path + ".coefficients: expected an array");
        p.segment.duration = p.duration;
        for (std::size_t c = 0; c < coeffs.size(); ++c) {
            p.segment.coeffs.push_back(numbers(coeffs[c], path + ".coefficients[" + std::to_string(c) + "]"));
        }
        if (!(p.duration > 0.0)) throw PlanError(path + ".duration: must be positive");
        p.segment.start = evaluate_segment(p.segment, 0.0, 1);
        p.segment.end = evaluate_segment(p.segment, p.duration, 1);
        const json& je = field(jp, "event", path);
        if (!je.is_null()) {
            const std::string epath = path + ".event";
            PlanEvent e;
            const std::string name = text(field(je, "transition", epath), epath + ".transition");
            auto id = a.find_transition(name);
            if (!id) throw PlanError(epath + ".transition: unknown transition '" + name + "'");
            e.transition = *id;
            e.time = number(field(je, "time", epath), epath + ".time");
            const json& inputs = field(je, "inputs", epath);
            if (!inputs.is_object()) throw PlanError(epath + ".inputs: expected an object");
            for (const auto& [input, value] : inputs.items()) {
                auto it = std::find(model.input_names.begin(), model.input_names.end(), input);
                if (it == model.input_names.end()) throw PlanError(epath + ".inputs: unknown input '" + input + "'");
                if (!value.is_number_integer()) throw PlanError(epath + ".inputs." + input + ": expected 0 or 1");
                e.inputs[static_cast<std::size_t>(it - model.input_names.begin())] = value.get<int>() != 0;
            }
            e.v_after = p.inputs;
            for (const auto& [input, value] : e.inputs) e.v_after.at(input) = value;
            e.x_before = numbers(field(je, "x_before", epath), epath + ".x_before");
            e.z_before = numbers(field(je, "z_before", epath), epath + ".z_before");
            e.x_after = numbers(field(je, "x_after", epath), epath + ".x_after");
            plan.path.push_back(e.transition);
            plan.sequence.push_back(a.transition(e.transition).tail);
            p.event = std::move(e);
        }
        plan.phases.push_back(std::move(p));
    }
    return plan;
}

std::string plan_to_csv(const ModelDefinition& model, const Plan& plan) {
    const Automaton& a = model.automaton;
    std::ostringstream out;
    out << "model," << plan.family << "\n";
    out << "d0," << a.state(plan.initial_state).name << "\n";
    out << "x0," << join_doubles(plan.x0, ';') << "\n";
    out << "eps," << format_double(plan.epsilon) << "\n";
    out << "degree," << plan.degree << "\n";
    out << "phase,state,start,duration,coefficients,event_time,transition,inputs,x_after\n";
    for (std::size_t i = 0; i < plan.phases.size(); ++i) {
        const PlanPhase& p = plan.phases[i];
        std::string coeffs;
        for (std::size_t c = 0; c < p.segment.coeffs.size(); ++c) {
            if (c) coeffs += '|';
            coeffs += join_doubles(p.segment.coeffs[c], ';');
        }
        out << i << ',' << a.state(p.state).name << ',' << format_double(p.start_time) << ','
            << format_double(p.duration) << ',' << coeffs << ',';
        if (p.event) {
            out << format_double(p.event->time) << ',' << a.transition(p.event->transition).name << ','
                << assignment_text(model, p.event->inputs) << ',' << join_doubles(p.event->x_after, ';');
        } else {
            out << ",,,";
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace fha
