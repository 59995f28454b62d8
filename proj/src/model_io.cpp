#include "fha/model_io.hpp"

#include "fha/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace fha {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ModelError(path + ": " + what);
}

const json& member(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing");
    return *it;
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

bool as_bit(const json& j, const std::string& path) {
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer()) {
        const auto v = j.get<long long>();
        if (v == 0 || v == 1) return v == 1;
    }
    fail(path, "expected 0, 1, true or false");
}

Vector as_vector(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    Vector out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

/// Resolves a reference given either as an index or as one of `names`.
std::size_t resolve(const json& j, const std::vector<std::string>& names, const char* kind, const std::string& path) {
    if (j.is_number_integer()) {
        const auto v = j.get<long long>();
        if (v < 0 || static_cast<std::size_t>(v) >= names.size()) {
            fail(path, std::string(kind) + " index " + std::to_string(v) + " out of range (" +
                           std::to_string(names.size()) + " " + kind + "s)");
        }
        return static_cast<std::size_t>(v);
    }
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == name) return i;
        }
        fail(path, "unknown " + std::string(kind) + " '" + name + "'");
    }
    fail(path, std::string("expected a ") + kind + " name or index");
}

std::vector<std::string> name_list(const json& root, const char* key, const std::vector<std::string>& fallback) {
    auto it = root.find(key);
    if (it == root.end()) return fallback;
    const std::string path = std::string("$.") + key;
    if (!it->is_array()) fail(path, "expected an array of names");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < it->size(); ++i) out.push_back(as_string((*it)[i], path + "[" + std::to_string(i) + "]"));
    if (out.size() != fallback.size()) {
        fail(path, "family expects " + std::to_string(fallback.size()) + " entries, got " + std::to_string(out.size()));
    }
    return out;
}

GuardAtom parse_atom(const json& j, const std::string& path, const std::vector<std::string>& inputs,
                     const std::vector<std::string>& outputs) {
    if (!j.is_object()) fail(path, "expected an object");
    const std::string type = as_string(member(j, "type", path), path + ".type");
    if (type == "input") {
        const std::size_t id = resolve(member(j, "input", path), inputs, "input", path + ".input");
        return GuardAtom::input(id, as_bit(member(j, "value", path), path + ".value"));
    }
    if (type == "output") {
        const std::size_t id = resolve(member(j, "output", path), outputs, "output", path + ".output");
        const std::string rel = as_string(member(j, "relation", path), path + ".relation");
        const auto relation = parse_relation(rel);
        if (!relation) fail(path + ".relation", "unknown relation '" + rel + "'");
        const double value = as_number(member(j, "value", path), path + ".value");
        if (!std::isfinite(value)) fail(path + ".value", "threshold must be finite");
        return GuardAtom::output(id, *relation, value);
    }
    fail(path + ".type", "expected \"input\" or \"output\", got '" + type + "'");
}

}  // namespace

ModelDefinition load_model(const std::string& document) {
    json root;
    try {
        root = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ModelError(std::string("$: ") + e.what());
    }
    if (!root.is_object()) fail("$", "expected an object");

    const std::string family = as_string(member(root, "family", "$"), "$.family");
    FamilyShape shape;
    try {
        shape = family_shape(family);
    } catch (const ModelError& e) {
        fail("$.family", e.what());
    }

    ParameterMap params = default_parameters(family);
    if (auto it = root.find("parameters"); it != root.end()) {
        if (!it->is_object()) fail("$.parameters", "expected an object");
        for (const auto& [name, value] : it->items()) {
            const std::string path = "$.parameters." + name;
            if (!params.count(name)) fail(path, "unknown parameter for family '" + family + "'");
            params[name] = as_number(value, path);
        }
    }

    const std::vector<std::string> inputs = name_list(root, "inputs", shape.inputs);
    const std::vector<std::string> outputs = name_list(root, "outputs", shape.outputs);

    const json& jstates = member(root, "states", "$");
    if (!jstates.is_array() || jstates.empty()) fail("$.states", "expected a non-empty array");
    std::vector<DiscreteState> states;
    std::vector<std::string> state_names;
    for (std::size_t i = 0; i < jstates.size(); ++i) {
        const std::string path = "$.states[" + std::to_string(i) + "]";
        const json& js = jstates[i];
        if (!js.is_object()) fail(path, "expected an object");
        DiscreteState s;
        s.id = StateId(i);
        s.name = as_string(member(js, "name", path), path + ".name");
        s.output_dim = shape.outputs.size();
        s.output_domain = shape.output_domain;
        if (auto it = js.find("invariant_inputs"); it != js.end()) {
            if (!it->is_array()) fail(path + ".invariant_inputs", "expected an array");
            for (std::size_t k = 0; k < it->size(); ++k) {
                const std::string ipath = path + ".invariant_inputs[" + std::to_string(k) + "]";
                const json& entry = (*it)[k];
                if (!entry.is_object()) fail(ipath, "expected an object");
                const std::size_t id = resolve(member(entry, "input", ipath), inputs, "input", ipath + ".input");
                s.invariant_inputs[id] = as_bit(member(entry, "value", ipath), ipath + ".value");
            }
        }
        state_names.push_back(s.name);
        states.push_back(std::move(s));
    }

    std::vector<Transition> transitions;
    if (auto it = root.find("transitions"); it != root.end()) {
        if (!it->is_array()) fail("$.transitions", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string path = "$.transitions[" + std::to_string(i) + "]";
            const json& jt = (*it)[i];
            if (!jt.is_object()) fail(path, "expected an object");
            Transition t;
            t.id = TransitionId(i);
            t.name = as_string(member(jt, "name", path), path + ".name");
            t.head = StateId(resolve(member(jt, "head", path), state_names, "state", path + ".head"));
            t.tail = StateId(resolve(member(jt, "tail", path), state_names, "state", path + ".tail"));
            if (auto p = jt.find("priority"); p != jt.end()) {
                if (!p->is_number_integer()) fail(path + ".priority", "expected an integer");
                t.priority = p->get<int>();
            }
            if (auto g = jt.find("guard"); g != jt.end()) {
                if (!g->is_array()) fail(path + ".guard", "expected an array of atoms");
                for (std::size_t k = 0; k < g->size(); ++k) {
                    t.guard.atoms.push_back(
                        parse_atom((*g)[k], path + ".guard[" + std::to_string(k) + "]", inputs, outputs));
                }
            }
            transitions.push_back(std::move(t));
        }
    }

    std::optional<InitialCondition> initial;
    StateId start(0);
    if (auto it = root.find("initial"); it != root.end()) {
        const std::string path = "$.initial";
        if (!it->is_object()) fail(path, "expected an object");
        start = StateId(resolve(member(*it, "state", path), state_names, "state", path + ".state"));
        if (auto x = it->find("x0"); x != it->end()) {
            InitialCondition ic;
            ic.state = start;
            ic.x0 = as_vector(*x, path + ".x0");
            if (auto z = it->find("free_outputs"); z != it->end()) ic.outputs = as_vector(*z, path + ".free_outputs");
            initial = std::move(ic);
        }
    }

    Automaton automaton(std::move(states), shape.inputs.size(), std::move(transitions), start);
    return attach_dynamics(family, params, std::move(automaton), inputs, outputs, initial);
}

ModelDefinition load_model_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_model(buf.str());
}

std::string save_model(const ModelDefinition& m) {
    const Automaton& a = m.automaton;
    ordered_json root;
    root["family"] = m.family;
    ordered_json params = ordered_json::object();
    for (const auto& [name, value] : m.parameters) params[name] = value;
    root["parameters"] = params;
    root["inputs"] = m.input_names;
    root["outputs"] = m.output_names;

    ordered_json states = ordered_json::array();
    for (const DiscreteState& s : a.states()) {
        ordered_json js;
        js["name"] = s.name;
        ordered_json inv = ordered_json::array();
        for (const auto& [id, value] : s.invariant_inputs) {
            inv.push_back({{"input", m.input_names.at(id)}, {"value", value ? 1 : 0}});
        }
        js["invariant_inputs"] = inv;
        states.push_back(js);
    }
    root["states"] = states;

    ordered_json transitions = ordered_json::array();
    for (const Transition& t : a.transitions()) {
        ordered_json jt;
        jt["name"] = t.name;
        jt["head"] = a.state(t.head).name;
        jt["tail"] = a.state(t.tail).name;
        jt["priority"] = t.priority;
        ordered_json guard = ordered_json::array();
        for (const GuardAtom& g : t.guard.atoms) {
            ordered_json atom;
            if (g.kind == GuardAtom::Kind::Input) {
                atom["type"] = "input";
                atom["input"] = m.input_names.at(g.index);
                atom["value"] = g.value ? 1 : 0;
            } else {
                atom["type"] = "output";
                atom["output"] = m.output_names.at(g.index);
                atom["relation"] = std::string(to_string(g.relation));
                atom["value"] = g.threshold;
            }
            guard.push_back(atom);
        }
        jt["guard"] = guard;
        transitions.push_back(jt);
    }
    root["transitions"] = transitions;

    ordered_json initial;
    initial["state"] = a.state(m.initial.state).name;
    initial["x0"] = m.initial.x0;
    initial["free_outputs"] = m.initial.outputs;
    root["initial"] = initial;
    return root.dump(2) + "\n";
}

}  // namespace fha
