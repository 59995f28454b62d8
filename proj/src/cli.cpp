#include "fha/cli.hpp"

#include "fha/error.hpp"
#include "fha/format.hpp"
#include "fha/model_io.hpp"
#include "fha/plan_io.hpp"
#include "fha/simulator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fha {
namespace {

using nlohmann::ordered_json;

/// Flag values that cannot be interpreted.
class UsageError : public Error {
public:
    using Error::Error;
};

struct Options {
    std::string model;
    std::vector<std::string> sets;
    std::string out;
    std::string format;
    std::uint64_t seed = kDefaultValidationSeed;

    std::optional<std::string> path;
    std::string from;
    std::string to;
    std::string x0;
    std::string z_final;
    double dt = 16.0;
    std::string dts;
    std::optional<double> final_dt;
    double eps = 0.05;
    int degree = 1;
    bool strict = false;

    double h = 0.016;
    double event_tol = 1e-9;
    std::size_t chain_cap = 0;
    double t_end = std::numeric_limits<double>::quiet_NaN();

    std::string plan_file;
    std::string trace_file;
    std::string events_file;
    double tol = 1e-3;
    double time_tol = 0.1;

    std::size_t max_len = 0;
    std::string mode = "walk";
    std::size_t limit = 20;
};

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_number(const std::string& text, const std::string& what) {
    double value = 0.0;
    const char* end = text.data() + text.size();
    auto res = std::from_chars(text.data(), end, value);
    if (res.ec != std::errc() || res.ptr != end) throw UsageError(what + ": '" + text + "' is not a number");
    return value;
}

Vector parse_vector(const std::string& text, const std::string& what) {
    Vector out;
    for (const std::string& item : split_list(text)) out.push_back(parse_number(item, what));
    return out;
}

ParameterMap parse_overrides(const std::vector<std::string>& sets) {
    ParameterMap out;
    for (const std::string& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--set expects name=value, got '" + s + "'");
        out[s.substr(0, eq)] = parse_number(s.substr(eq + 1), "--set " + s.substr(0, eq));
    }
    return out;
}

ModelDefinition load(const Options& o) {
    const ParameterMap overrides = parse_overrides(o.sets);
    const auto families = model_families();
    if (std::find(families.begin(), families.end(), o.model) != families.end()) return build_model(o.model, overrides);
    if (!std::filesystem::exists(o.model)) {
        std::string known;
        for (const auto& f : families) known += (known.empty() ? "" : ", ") + f;
        throw ModelError("'" + o.model + "' is neither a model file nor a built-in model (" + known + ")");
    }
    ModelDefinition m = load_model_file(o.model);
    return overrides.empty() ? m : with_parameters(m, overrides);
}

StateId state_ref(const Automaton& a, const std::string& name) {
    auto id = a.find_state(name);
    if (!id) throw UsageError("unknown state '" + name + "'");
    return *id;
}

Path parse_path(const Automaton& a, const std::string& text) {
    Path out;
    for (const std::string& name : split_list(text)) {
        auto id = a.find_transition(name);
        if (!id) throw UsageError("unknown transition '" + name + "'");
        out.push_back(*id);
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw UsageError("cannot write '" + path + "'");
        f << text;
        if (!f.flush()) throw UsageError("cannot write '" + path + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw UsageError("cannot write '" + path + "': " + ec.message());
}

void emit(const Options& o, std::ostream& out, const std::string& text) {
    if (o.out.empty()) {
        out << text;
    } else {
        write_file(o.out, text);
    }
}

bool json_format(const Options& o, const char* fallback) {
    const std::string f = o.format.empty() ? fallback : o.format;
    return f == "json";
}

std::string names(const Automaton& a, const Path& path) {
    std::string s;
    for (TransitionId e : path) s += (s.empty() ? "" : ",") + a.transition(e).name;
    return s;
}

std::string names(const Automaton& a, const Sequence& seq) {
    std::string s;
    for (StateId d : seq) s += (s.empty() ? "" : ",") + a.state(d).name;
    return s;
}

std::string inputs_text(const ModelDefinition& m, const std::map<std::size_t, bool>& inputs) {
    std::string s;
    for (const auto& [id, value] : inputs) s += (s.empty() ? "" : ", ") + m.input_names.at(id) + "=" + (value ? "1" : "0");
    return "{" + s + "}";
}

PlanRequest request_from(const Options& o, const ModelDefinition& m) {
    const Automaton& a = m.automaton;
    PlanRequest r = default_request(m);
    if (!o.from.empty()) r.initial_state = state_ref(a, o.from);
    r.final_state = o.to.empty() ? r.initial_state : state_ref(a, o.to);
    if (!o.x0.empty()) r.x0 = parse_vector(o.x0, "--x0");
    if (!o.z_final.empty()) {
        r.z_final = parse_vector(o.z_final, "--z-final");
    } else if (r.final_state != m.initial.state) {
        throw UsageError("--z-final is required when the final state differs from '" +
                         a.state(m.initial.state).name + "'");
    }
    if (o.path) r.path = parse_path(a, *o.path);
    r.default_duration = o.dt;
    if (!o.dts.empty()) r.durations = parse_vector(o.dts, "--dts");
    r.final_duration = o.final_dt;
    r.epsilon = o.eps;
    r.degree = o.degree;
    r.strict = o.strict;
    return r;
}

Plan plan_from(const Options& o, const ModelDefinition& m) {
    if (!o.plan_file.empty()) return plan_from_json(m, read_file(o.plan_file));
    return plan(m, request_from(o, m));
}

SimConfig config_from(const Options& o) {
    SimConfig c;
    c.h = o.h;
    c.tolerance = o.event_tol;
    c.chain_cap = o.chain_cap;
    c.t_end = o.t_end;
    return c;
}

int cmd_verify(const Options& o, std::ostream& out) {
    const ModelDefinition m = load(o);
    const ValidationReport r = validate_fha(m, o.seed);
    if (!json_format(o, "csv")) {
        emit(o, out, format_report(r, m));
        return r.passed() ? kExitOk : kExitFailed;
    }
    const Automaton& a = m.automaton;
    ordered_json j;
    j["model"] = m.family;
    j["strongly_connected"] = r.strongly_connected;
    j["deterministic"] = r.deterministic();
    ordered_json conflicts = ordered_json::array();
    for (const DeterminismConflict& c : r.conflicts) {
        conflicts.push_back({{"first", a.transition(c.first).name},
                             {"second", a.transition(c.second).name},
                             {"reason", c.reason}});
    }
    j["conflicts"] = conflicts;
    j["guard_errors"] = r.guard_errors;
    j["jump_errors"] = r.jump_errors;
    ordered_json states = ordered_json::array();
    for (const StateCheck& c : r.states) {
        ordered_json s;
        s["state"] = a.state(c.state).name;
        ordered_json inv = ordered_json::object();
        for (const auto& [id, value] : c.invariant_inputs) inv[m.input_names.at(id)] = value ? 1 : 0;
        s["invariant_inputs"] = inv;
        s["invariant_outputs"] = c.invariant_outputs;
        s["square"] = c.square;
        s["residual"] = c.residual;
        s["error"] = c.error;
        states.push_back(s);
    }
    j["states"] = states;
    j["passed"] = r.passed();
    emit(o, out, j.dump(2) + "\n");
    return r.passed() ? kExitOk : kExitFailed;
}

int cmd_paths(const Options& o, std::ostream& out) {
    const ModelDefinition m = load(o);
    const Automaton& a = m.automaton;
    const StateId from = o.from.empty() ? a.initial() : state_ref(a, o.from);
    const StateId to = o.to.empty() ? from : state_ref(a, o.to);
    if (o.mode != "walk" && o.mode != "simple") throw UsageError("--mode must be 'walk' or 'simple'");
    const WalkMode mode = o.mode == "walk" ? WalkMode::Walk : WalkMode::Simple;
    const std::size_t max_len = o.max_len ? o.max_len : a.transition_count();
    const auto walks = enumerate_walks(a, from, to, max_len, mode, o.limit);
    std::ostringstream text;
    ordered_json j = ordered_json::array();
    for (const Path& p : walks) {
        const Sequence s = path_to_sequence(a, p, from);
        text << (p.empty() ? "(empty)" : names(a, p)) << " : " << names(a, s) << "\n";
        j.push_back({{"path", split_list(names(a, p))}, {"sequence", split_list(names(a, s))}});
    }
    emit(o, out, json_format(o, "csv") ? j.dump(2) + "\n" : text.str());
    return walks.empty() ? kExitFailed : kExitOk;
}

int cmd_invert(const Options& o, std::ostream& out) {
    const ModelDefinition m = load(o);
    const Automaton& a = m.automaton;
    if (!o.path) throw UsageError("invert needs --path");
    const Path p = parse_path(a, *o.path);
    const StateId from = o.from.empty() ? a.initial() : state_ref(a, o.from);
    const Sequence s = path_to_sequence(a, p, from);
    std::ostringstream text;
    text << "sequence: " << names(a, s) << "\n";
    ordered_json steps = ordered_json::array();
    for (TransitionId e : p) {
        const Transition& t = a.transition(e);
        const SwitchingSpec spec = guard_inverse(a, e);
        const std::string outputs = Region::from_box(spec.output_sets).str();
        text << t.name << ": " << a.state(t.head).name << " -> " << a.state(t.tail).name << ", inputs "
             << inputs_text(m, spec.required_inputs) << ", outputs " << outputs << "\n";
        ordered_json inputs = ordered_json::object();
        for (const auto& [id, value] : spec.required_inputs) inputs[m.input_names.at(id)] = value ? 1 : 0;
        steps.push_back({{"transition", t.name},
                         {"head", a.state(t.head).name},
                         {"tail", a.state(t.tail).name},
                         {"inputs", inputs},
                         {"outputs", outputs}});
    }
    ordered_json j;
    j["sequence"] = split_list(names(a, s));
    j["transitions"] = steps;
    emit(o, out, json_format(o, "csv") ? j.dump(2) + "\n" : text.str());
    return kExitOk;
}

int cmd_plan(const Options& o, std::ostream& out) {
    const ModelDefinition m = load(o);
    const Plan p = plan(m, request_from(o, m));
    emit(o, out, json_format(o, "json") ? plan_to_json(m, p) : plan_to_csv(m, p));
    return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    const ModelDefinition m = load(o);
    const Plan p = plan_from(o, m);
    const SimTrace trace = simulate(m, p.initial_state, p.x0, schedule_from_plan(m, p), config_from(o));
    if (json_format(o, "csv")) {
        emit(o, out, trace_to_json(m, trace));
    } else {
        emit(o, out, trace_to_csv(m, trace));
        if (!o.events_file.empty()) {
            write_file(o.events_file, events_to_csv(m, trace));
        } else if (!o.out.empty()) {
            write_file(o.out + ".events.csv", events_to_csv(m, trace));
        }
    }
    return kExitOk;
}

int cmd_check(const Options& o, std::ostream& out) {
    const ModelDefinition m = load(o);
    const Automaton& a = m.automaton;
    const Plan p = plan_from(o, m);
    SimTrace trace;
    if (!o.trace_file.empty()) {
        const std::string events = o.events_file.empty() ? o.trace_file + ".events.csv" : o.events_file;
        trace = trace_from_csv(m, read_file(o.trace_file), read_file(events));
    } else {
        trace = simulate(m, p.initial_state, p.x0, schedule_from_plan(m, p), config_from(o));
    }
    const PlanComparison c = compare_trace_to_plan(m, trace, p);
    const bool ok = c.passed(o.tol, o.time_tol);
    const Path sim = trace.path();

    if (json_format(o, "csv")) {
        ordered_json j;
        j["sequence_match"] = c.sequence_match;
        j["first_mismatch"] = c.first_mismatch ? ordered_json(*c.first_mismatch) : ordered_json(nullptr);
        j["trace_path"] = split_list(names(a, sim));
        j["plan_path"] = split_list(names(a, p.path));
        j["time_deviation"] = c.time_deviation;
        j["phase_deviation"] = c.phase_deviation;
        j["max_time_deviation"] = c.max_time_deviation;
        j["max_output_deviation"] = c.max_output_deviation;
        j["passed"] = ok;
        emit(o, out, j.dump(2) + "\n");
        return ok ? kExitOk : kExitFailed;
    }
    std::ostringstream text;
    if (c.sequence_match) {
        text << "sequence: match (" << sim.size() << " events)\n";
    } else {
        const std::size_t i = *c.first_mismatch;
        auto at = [&](const Path& path) { return i < path.size() ? a.transition(path[i]).name : std::string("end"); };
        text << "sequence: mismatch at event " << i << ": trace " << at(sim) << ", plan " << at(p.path);
        if (i < trace.events.size()) text << " (t = " << format_double(trace.events[i].t) << ")";
        text << "\n";
    }
    text << "max time deviation: " << format_double(c.max_time_deviation) << " (tolerance "
         << format_double(o.time_tol) << ")\n";
    text << "max output deviation: " << format_double(c.max_output_deviation) << " (tolerance "
         << format_double(o.tol) << ")\n";
    for (std::size_t i = 0; i < c.phase_deviation.size(); ++i) {
        text << "  phase " << i << " (" << a.state(p.phases[i].state).name
             << "): " << format_double(c.phase_deviation[i]) << "\n";
    }
    text << "result: " << (ok ? "PASS" : "FAIL") << "\n";
    emit(o, out, text.str());
    return ok ? kExitOk : kExitFailed;
}

int cmd_prune(const Options& o, std::ostream& out, std::ostream& err) {
    const ModelDefinition m = load(o);
    const Automaton& a = m.automaton;
    if (!is_strongly_connected(adjacency(a))) {
        err << "error: '" << m.family << "' model is not strongly connected\n";
        return kExitFailed;
    }
    const Path removable = removable_transitions(a);
    const Path pruned = prune_transitions(a);
    const std::set<TransitionId> dropped(pruned.begin(), pruned.end());
    const BoolMatrix proof = reach_power(adjacency(a, dropped));

    if (json_format(o, "csv")) {
        ordered_json j;
        j["removable"] = split_list(names(a, removable));
        j["pruned"] = split_list(names(a, pruned));
        ordered_json rows = ordered_json::array();
        for (std::size_t i = 0; i < proof.size(); ++i) {
            ordered_json row = ordered_json::array();
            for (std::size_t k = 0; k < proof.size(); ++k) row.push_back(proof.at(i, k) ? 1 : 0);
            rows.push_back(row);
        }
        j["reach_after_pruning"] = rows;
        j["strongly_connected_after_pruning"] = proof.all_true();
        emit(o, out, j.dump(2) + "\n");
        return kExitOk;
    }
    std::ostringstream text;
    text << "removable individually: " << (removable.empty() ? "none" : names(a, removable)) << "\n";
    text << "greedy pruning removes: " << (pruned.empty() ? "none" : names(a, pruned)) << "\n";
    text << "(I + A)^" << a.state_count() - 1 << " after pruning:\n";
    for (std::size_t i = 0; i < proof.size(); ++i) {
        text << "  " << a.state(StateId(i)).name << ":";
        for (std::size_t k = 0; k < proof.size(); ++k) text << ' ' << (proof.at(i, k) ? 1 : 0);
        text << "\n";
    }
    text << "strongly connected after pruning: " << (proof.all_true() ? "yes" : "no") << "\n";
    emit(o, out, text.str());
    return kExitOk;
}

void model_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--model", o.model, "Built-in model name or model JSON file")->required();
    cmd->add_option("--set", o.sets, "Parameter override name=value (repeatable)");
    cmd->add_option("--out", o.out, "Output file (default: standard output)");
    cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

void plan_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--path", o.path, "Comma-separated transition names");
    cmd->add_option("--from", o.from, "Initial state (default: the model's)");
    cmd->add_option("--to", o.to, "Final state (default: the initial state)");
    cmd->add_option("--x0", o.x0, "Initial continuous state, comma-separated");
    cmd->add_option("--z-final", o.z_final, "Final flat output, comma-separated");
    cmd->add_option("--dt", o.dt, "Uniform phase duration")->check(CLI::PositiveNumber);
    cmd->add_option("--dts", o.dts, "Per-transition phase durations, comma-separated");
    cmd->add_option("--final-dt", o.final_dt, "Duration of the last phase")->check(CLI::PositiveNumber);
    cmd->add_option("--eps", o.eps, "Switching margin")->check(CLI::PositiveNumber);
    cmd->add_option("--degree", o.degree, "Segment degree")->check(CLI::IsMember({1, 3}));
    cmd->add_flag("--strict", o.strict, "Reject plans whose segments fire a transition early");
}

void sim_options(CLI::App* cmd, Options& o, bool tol_is_event_tol) {
    cmd->add_option("--plan", o.plan_file, "Plan JSON written by 'plan' (default: plan from flags)");
    cmd->add_option("--h", o.h, "RK4 step")->check(CLI::PositiveNumber);
    if (tol_is_event_tol) {
        cmd->add_option("--tol", o.event_tol, "Event bisection tolerance")->check(CLI::PositiveNumber);
    } else {
        cmd->add_option("--event-tol", o.event_tol, "Event bisection tolerance")->check(CLI::PositiveNumber);
    }
    cmd->add_option("--chain-cap", o.chain_cap, "Switchings allowed at one instant (0: number of states)");
    cmd->add_option("--t-end", o.t_end, "Simulation horizon (default: end of the plan)");
    cmd->add_option("--events", o.events_file, "Event CSV file");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Flat hybrid automata: verify, invert, plan, simulate", "fha"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    Options o;

    CLI::App* verify = app.add_subcommand("verify", "Check connectivity, determinism, invariants and flatness");
    model_options(verify, o);
    verify->add_option("--seed", o.seed, "Seed for the sampled flatness residuals");

    CLI::App* paths = app.add_subcommand("paths", "Enumerate paths between two states");
    model_options(paths, o);
    paths->add_option("--from", o.from, "Start state (default: the model's initial state)");
    paths->add_option("--to", o.to, "End state (default: the start state)");
    paths->add_option("--max-len", o.max_len, "Longest path (default: number of transitions)");
    paths->add_option("--mode", o.mode, "walk: states may repeat; simple: no repeated state")
        ->check(CLI::IsMember({"walk", "simple"}));
    paths->add_option("--limit", o.limit, "Maximum number of paths listed");

    CLI::App* invert = app.add_subcommand("invert", "Discrete sequence and switching sets of a path");
    model_options(invert, o);
    invert->add_option("--path", o.path, "Comma-separated transition names");
    invert->add_option("--from", o.from, "Start state (default: the model's initial state)");

    CLI::App* plan_cmd = app.add_subcommand("plan", "Compute a feed-forward plan along a path");
    model_options(plan_cmd, o);
    plan_options(plan_cmd, o);

    CLI::App* sim = app.add_subcommand("simulate", "Replay a plan with the forward simulator");
    model_options(sim, o);
    plan_options(sim, o);
    sim_options(sim, o, true);

    CLI::App* check = app.add_subcommand("check", "Compare a simulated trace with its plan");
    model_options(check, o);
    plan_options(check, o);
    sim_options(check, o, false);
    check->add_option("--trace", o.trace_file, "Trace CSV (default: simulate the plan)");
    check->add_option("--tol", o.tol, "Largest accepted flat-output deviation")->check(CLI::NonNegativeNumber);
    check->add_option("--time-tol", o.time_tol, "Largest accepted event time deviation")
        ->check(CLI::NonNegativeNumber);

    CLI::App* prune = app.add_subcommand("prune", "Transitions removable without losing strong connectivity");
    model_options(prune, o);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }

    try {
        if (verify->parsed()) return cmd_verify(o, out);
        if (paths->parsed()) return cmd_paths(o, out);
        if (invert->parsed()) return cmd_invert(o, out);
        if (plan_cmd->parsed()) return cmd_plan(o, out);
        if (sim->parsed()) return cmd_simulate(o, out);
        if (check->parsed()) return cmd_check(o, out);
        return cmd_prune(o, out, err);
    } catch (const ZenoError& e) {
        err << "simulation error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const NondeterminismError& e) {
        err << "simulation error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const DomainError& e) {
        err << "simulation error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }
}

}  // namespace fha
