#include "fha/error.hpp"
#include "fha/format.hpp"
#include "fha/simulator.hpp"

#include <json.hpp>

#include <charconv>
#include <limits>
#include <sstream>

namespace fha {
namespace {

struct Columns {
    std::size_t v = 0;
    std::size_t x = 0;
    std::size_t z = 0;
    std::size_t u = 0;
};

Columns columns(const ModelDefinition& m) {
    Columns c;
    c.v = m.automaton.n_inputs();
    c.z = m.output_names.size();
    for (const FlatMaps& f : m.flat) {
        c.x = std::max(c.x, f.nx());
        c.u = std::max(c.u, f.nu());
    }
    return c;
}

void numbered(std::ostringstream& out, const char* prefix, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out << ',' << prefix << i;
}

void padded(std::ostringstream& out, const Vector& values, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out << ',';
        if (i < values.size()) out << format_double(values[i]);
    }
}

std::string sample_header(const Columns& c) {
    std::ostringstream out;
    out << "t,k,state";
    numbered(out, "v_", c.v);
    numbered(out, "x_", c.x);
    numbered(out, "z_", c.z);
    numbered(out, "u_", c.u);
    return out.str();
}

std::string event_header(const Columns& c) {
    std::ostringstream out;
    out << "t,chain,transition";
    numbered(out, "x_before_", c.x);
    numbered(out, "x_after_", c.x);
    return out.str();
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

class CsvReader {
public:
    CsvReader(const std::string& text, std::string name, std::string header) : in_(text), name_(std::move(name)) {
        std::string first;
        if (!std::getline(in_, first)) fail("empty file");
        strip(first);
        if (first != header) fail("unexpected header '" + first + "', expected '" + header + "'");
    }

    bool next(std::vector<std::string>& cells, std::size_t width) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            strip(line);
            if (line.empty()) continue;
            cells = split(line);
            if (cells.size() != width) {
                fail(std::to_string(cells.size()) + " cells, expected " + std::to_string(width));
            }
            return true;
        }
        return false;
    }

    double number(const std::string& cell) const {
        if (cell == "inf") return std::numeric_limits<double>::infinity();
        if (cell == "-inf") return -std::numeric_limits<double>::infinity();
        if (cell == "nan") return std::numeric_limits<double>::quiet_NaN();
        double value = 0.0;
        auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
        if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) fail("bad number '" + cell + "'");
        return value;
    }

    std::size_t count(const std::string& cell) const {
        std::size_t value = 0;
        auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
        if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) fail("bad integer '" + cell + "'");
        return value;
    }

    /// Leading non-empty cells of [first, first + n).
    Vector vector(const std::vector<std::string>& cells, std::size_t first, std::size_t n) const {
        Vector out;
        for (std::size_t i = first; i < first + n && !cells[i].empty(); ++i) out.push_back(number(cells[i]));
        return out;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(name_ + " line " + std::to_string(line_) + ": " + what);
    }

private:
    static void strip(std::string& line) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
    }

    std::istringstream in_;
    std::string name_;
    std::size_t line_ = 1;
};

}  // namespace

std::string trace_to_csv(const ModelDefinition& model, const SimTrace& trace) {
    const Columns c = columns(model);
    std::ostringstream out;
    out << sample_header(c) << "\n";
    for (const TraceSample& s : trace.samples) {
        out << format_double(s.t) << ',' << s.k << ',' << model.automaton.state(s.state).name;
        for (std::size_t i = 0; i < c.v; ++i) out << ',' << (i < s.v.size() && s.v[i] ? 1 : 0);
        padded(out, s.x, c.x);
        padded(out, s.z, c.z);
        padded(out, s.u, c.u);
        out << "\n";
    }
    return out.str();
}

std::string events_to_csv(const ModelDefinition& model, const SimTrace& trace) {
    const Columns c = columns(model);
    std::ostringstream out;
    out << event_header(c) << "\n";
    for (const TraceEvent& e : trace.events) {
        out << format_double(e.t) << ',' << e.chain << ',' << model.automaton.transition(e.transition).name;
        padded(out, e.x_before, c.x);
        padded(out, e.x_after, c.x);
        out << "\n";
    }
    return out.str();
}

std::string trace_to_json(const ModelDefinition& model, const SimTrace& trace) {
    using nlohmann::ordered_json;
    const Automaton& a = model.automaton;
    ordered_json root;
    ordered_json samples = ordered_json::array();
    for (const TraceSample& s : trace.samples) {
        ordered_json js;
        js["t"] = s.t;
        js["k"] = s.k;
        js["state"] = a.state(s.state).name;
        ordered_json v = ordered_json::array();
        for (bool b : s.v) v.push_back(b ? 1 : 0);
        js["v"] = v;
        js["x"] = s.x;
        js["z"] = s.z;
        js["u"] = s.u;
        samples.push_back(js);
    }
    ordered_json events = ordered_json::array();
    for (const TraceEvent& e : trace.events) {
        ordered_json je;
        je["t"] = e.t;
        je["chain"] = e.chain;
        je["transition"] = a.transition(e.transition).name;
        je["x_before"] = e.x_before;
        je["z_before"] = e.z_before;
        je["x_after"] = e.x_after;
        events.push_back(je);
    }
    root["samples"] = samples;
    root["events"] = events;
    return root.dump(2) + "\n";
}

SimTrace trace_from_csv(const ModelDefinition& model, const std::string& samples, const std::string& events) {
    const Automaton& a = model.automaton;
    const Columns c = columns(model);
    SimTrace out;

    CsvReader sr(samples, "trace", sample_header(c));
    std::vector<std::string> cells;
    const std::size_t width = 3 + c.v + c.x + c.z + c.u;
    while (sr.next(cells, width)) {
        TraceSample s;
        s.t = sr.number(cells[0]);
        s.k = sr.count(cells[1]);
        const auto d = a.find_state(cells[2]);
        if (!d) sr.fail("unknown state '" + cells[2] + "'");
        s.state = *d;
        std::size_t col = 3;
        for (std::size_t i = 0; i < c.v; ++i, ++col) {
            if (cells[col] != "0" && cells[col] != "1") sr.fail("discrete input must be 0 or 1");
            s.v.push_back(cells[col] == "1");
        }
        s.x = sr.vector(cells, col, c.x);
        col += c.x;
        s.z = sr.vector(cells, col, c.z);
        col += c.z;
        s.u = sr.vector(cells, col, c.u);
        out.samples.push_back(std::move(s));
    }

    CsvReader er(events, "events", event_header(c));
    while (er.next(cells, 3 + 2 * c.x)) {
        TraceEvent e;
        e.t = er.number(cells[0]);
        e.chain = er.count(cells[1]);
        const auto id = a.find_transition(cells[2]);
        if (!id) er.fail("unknown transition '" + cells[2] + "'");
        e.transition = *id;
        e.x_before = er.vector(cells, 3, c.x);
        e.x_after = er.vector(cells, 3 + c.x, c.x);
        out.events.push_back(std::move(e));
    }
    return out;
}

}  // namespace fha
