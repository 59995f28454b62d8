#pragma once

#include "fha/interval.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fha {

/// Finite union of boxes in R^n.
///
/// Boolean operations are exact: they are computed on the cell grid spanned
/// by every interval endpoint of the operands (open spans between endpoints
/// plus the endpoints themselves), so strict and non-strict bounds are kept
/// apart.  normalized() returns a canonical box decomposition of the same
/// set.
class Region {
public:
    explicit Region(std::size_t dim = 0) : dim_(dim) {}

    [[nodiscard]] static Region whole(std::size_t dim);
    [[nodiscard]] static Region from_box(Box box);

    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] const std::vector<Box>& boxes() const { return boxes_; }

    [[nodiscard]] bool contains(std::span<const double> z) const;
    [[nodiscard]] bool empty() const;

    [[nodiscard]] Region unite(const Region& other) const;
    [[nodiscard]] Region intersect(const Region& other) const;
    /// domain minus this region.
    [[nodiscard]] Region complement_within(const Box& domain) const;
    [[nodiscard]] bool subset_of(const Region& other) const;
    [[nodiscard]] bool same_set(const Region& other) const;

    [[nodiscard]] Region normalized() const;
    /// The region as a single box, if it is one.
    [[nodiscard]] std::optional<Box> as_box() const;

    /// "[0, 5] x (-inf, inf) | ..." in normalized form; "{}" when empty.
    [[nodiscard]] std::string str() const;

private:
    std::size_t dim_;
    std::vector<Box> boxes_;
};

}  // namespace fha
