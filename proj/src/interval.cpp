#include "fha/interval.hpp"

#include "fha/error.hpp"
#include "fha/format.hpp"

#include <algorithm>
#include <cmath>

namespace fha {

std::string_view to_string(Relation r) {
    switch (r) {
        case Relation::Less: return "<";
        case Relation::LessEqual: return "<=";
        case Relation::Greater: return ">";
        case Relation::GreaterEqual: return ">=";
    }
    return "?";
}

std::optional<Relation> parse_relation(std::string_view text) {
    if (text == "<") return Relation::Less;
    if (text == "<=") return Relation::LessEqual;
    if (text == ">") return Relation::Greater;
    if (text == ">=") return Relation::GreaterEqual;
    return std::nullopt;
}

bool compare(double value, Relation r, double threshold) {
    switch (r) {
        case Relation::Less: return value < threshold;
        case Relation::LessEqual: return value <= threshold;
        case Relation::Greater: return value > threshold;
        case Relation::GreaterEqual: return value >= threshold;
    }
    return false;
}

Interval Interval::from_relation(Relation r, double threshold) {
    if (!std::isfinite(threshold)) {
        throw ModelError("guard threshold must be finite");
    }
    Interval out;
    switch (r) {
        case Relation::Less: out.hi = threshold; break;
        case Relation::LessEqual: out.hi = threshold; out.hi_closed = true; break;
        case Relation::Greater: out.lo = threshold; break;
        case Relation::GreaterEqual: out.lo = threshold; out.lo_closed = true; break;
    }
    return out;
}

bool Interval::contains(double x) const {
    const bool above = lo_closed ? x >= lo : x > lo;
    const bool below = hi_closed ? x <= hi : x < hi;
    return above && below;
}

bool Interval::empty() const {
    if (lo < hi) return false;
    if (lo > hi) return true;
    return !(lo_closed && hi_closed);
}

bool Interval::is_whole() const {
    return !bounded_below() && !bounded_above();
}

Interval Interval::intersect(const Interval& other) const {
    Interval out;
    if (lo > other.lo) {
        out.lo = lo;
        out.lo_closed = lo_closed;
    } else if (other.lo > lo) {
        out.lo = other.lo;
        out.lo_closed = other.lo_closed;
    } else {
        out.lo = lo;
        out.lo_closed = lo_closed && other.lo_closed;
    }
    if (hi < other.hi) {
        out.hi = hi;
        out.hi_closed = hi_closed;
    } else if (other.hi < hi) {
        out.hi = other.hi;
        out.hi_closed = other.hi_closed;
    } else {
        out.hi = hi;
        out.hi_closed = hi_closed && other.hi_closed;
    }
    if (!out.bounded_below()) out.lo_closed = false;
    if (!out.bounded_above()) out.hi_closed = false;
    return out;
}

std::string Interval::str() const {
    std::string s;
    s += lo_closed ? '[' : '(';
    s += bounded_below() ? format_double(lo) : "-inf";
    s += ", ";
    s += bounded_above() ? format_double(hi) : "inf";
    s += hi_closed ? ']' : ')';
    return s;
}

Box whole_box(std::size_t dim) {
    return Box(dim, Interval::whole());
}

bool box_empty(const Box& b) {
    return std::any_of(b.begin(), b.end(), [](const Interval& i) { return i.empty(); });
}

bool box_contains(const Box& b, std::span<const double> z) {
    if (z.size() != b.size()) return false;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (!b[i].contains(z[i])) return false;
    }
    return true;
}

Box box_intersect(const Box& a, const Box& b) {
    if (a.size() != b.size()) {
        throw Error("box dimension mismatch");
    }
    Box out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].intersect(b[i]);
    return out;
}

}  // namespace fha
