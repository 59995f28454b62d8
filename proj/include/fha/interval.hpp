#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fha {

enum class Relation { Less, LessEqual, Greater, GreaterEqual };

[[nodiscard]] std::string_view to_string(Relation r);
[[nodiscard]] std::optional<Relation> parse_relation(std::string_view text);
[[nodiscard]] bool compare(double value, Relation r, double threshold);

/// Real interval with independently open or closed ends.  Infinite ends are
/// always open.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_closed = false;
    bool hi_closed = false;

    [[nodiscard]] static Interval whole() { return {}; }
    [[nodiscard]] static Interval closed(double lo, double hi) { return {lo, hi, true, true}; }
    [[nodiscard]] static Interval at_least(double lo) { return {lo, std::numeric_limits<double>::infinity(), true, false}; }
    /// Set of values satisfying `value <relation> threshold`.
    [[nodiscard]] static Interval from_relation(Relation r, double threshold);

    [[nodiscard]] bool contains(double x) const;
    [[nodiscard]] bool empty() const;
    [[nodiscard]] bool is_whole() const;
    [[nodiscard]] bool bounded_below() const { return lo > -std::numeric_limits<double>::infinity(); }
    [[nodiscard]] bool bounded_above() const { return hi < std::numeric_limits<double>::infinity(); }
    [[nodiscard]] Interval intersect(const Interval& other) const;

    /// Interval notation, e.g. "(5, inf)" or "[0, 5]".
    [[nodiscard]] std::string str() const;

    bool operator==(const Interval&) const = default;
};

/// Axis-aligned product of intervals, one per output component.
using Box = std::vector<Interval>;

[[nodiscard]] Box whole_box(std::size_t dim);
[[nodiscard]] bool box_empty(const Box& b);
[[nodiscard]] bool box_contains(const Box& b, std::span<const double> z);
[[nodiscard]] Box box_intersect(const Box& a, const Box& b);

}  // namespace fha
