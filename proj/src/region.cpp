#include "fha/region.hpp"

#include "fha/error.hpp"

#include <algorithm>

namespace fha {
namespace {

/// Elementary cells along one axis: cell 2i+1 is the point b[i], even cells
/// are the open spans between consecutive breakpoints.
struct Axis {
    std::vector<double> breaks;

    [[nodiscard]] std::size_t cells() const { return 2 * breaks.size() + 1; }

    [[nodiscard]] double representative(std::size_t k) const {
        const std::size_t m = breaks.size();
        if (m == 0) return 0.0;
        if (k % 2 == 1) return breaks[(k - 1) / 2];
        if (k == 0) return breaks.front() - 1.0;
        if (k == 2 * m) return breaks.back() + 1.0;
        const double a = breaks[k / 2 - 1];
        const double b = breaks[k / 2];
        return a + 0.5 * (b - a);
    }

    [[nodiscard]] Interval span(std::size_t first, std::size_t last) const {
        Interval out;
        if (first % 2 == 1) {
            out.lo = breaks[(first - 1) / 2];
            out.lo_closed = true;
        } else if (first > 0) {
            out.lo = breaks[first / 2 - 1];
        }
        if (last % 2 == 1) {
            out.hi = breaks[(last - 1) / 2];
            out.hi_closed = true;
        } else if (last < 2 * breaks.size()) {
            out.hi = breaks[last / 2];
        }
        return out;
    }
};

std::vector<Axis> build_grid(std::size_t dim, std::initializer_list<const std::vector<Box>*> sources) {
    std::vector<Axis> axes(dim);
    for (const auto* boxes : sources) {
        for (const Box& b : *boxes) {
            for (std::size_t d = 0; d < dim; ++d) {
                if (b[d].bounded_below()) axes[d].breaks.push_back(b[d].lo);
                if (b[d].bounded_above()) axes[d].breaks.push_back(b[d].hi);
            }
        }
    }
    for (Axis& a : axes) {
        std::sort(a.breaks.begin(), a.breaks.end());
        a.breaks.erase(std::unique(a.breaks.begin(), a.breaks.end()), a.breaks.end());
    }
    return axes;
}

struct CellRange {
    std::vector<std::size_t> first;
    std::vector<std::size_t> last;
};

/// Visits every cell of the grid, collecting the ones accepted by `keep`.
template <class Keep>
std::vector<CellRange> collect_cells(const std::vector<Axis>& axes, Keep keep) {
    const std::size_t dim = axes.size();
    std::vector<std::size_t> idx(dim, 0);
    std::vector<double> point(dim);
    std::vector<CellRange> out;
    while (true) {
        for (std::size_t d = 0; d < dim; ++d) point[d] = axes[d].representative(idx[d]);
        if (keep(std::span<const double>(point))) out.push_back({idx, idx});
        std::size_t d = 0;
        for (; d < dim; ++d) {
            if (++idx[d] < axes[d].cells()) break;
            idx[d] = 0;
        }
        if (d == dim) break;
    }
    return out;
}

/// Greedy axis-by-axis merge of adjacent cell ranges.  Deterministic, and a
/// set that is a box always collapses to one range.
std::vector<CellRange> merge_cells(std::vector<CellRange> cells, std::size_t dim) {
    for (std::size_t axis = 0; axis < dim; ++axis) {
        auto others_less = [axis, dim](const CellRange& a, const CellRange& b) {
            for (std::size_t d = 0; d < dim; ++d) {
                if (d == axis) continue;
                if (a.first[d] != b.first[d]) return a.first[d] < b.first[d];
                if (a.last[d] != b.last[d]) return a.last[d] < b.last[d];
            }
            return a.first[axis] < b.first[axis];
        };
        auto others_equal = [axis, dim](const CellRange& a, const CellRange& b) {
            for (std::size_t d = 0; d < dim; ++d) {
                if (d == axis) continue;
                if (a.first[d] != b.first[d] || a.last[d] != b.last[d]) return false;
            }
            return true;
        };
        std::sort(cells.begin(), cells.end(), others_less);
        std::vector<CellRange> merged;
        for (CellRange& c : cells) {
            if (!merged.empty() && others_equal(merged.back(), c) && merged.back().last[axis] + 1 == c.first[axis]) {
                merged.back().last[axis] = c.last[axis];
            } else {
                merged.push_back(std::move(c));
            }
        }
        cells = std::move(merged);
    }
    return cells;
}

std::vector<Box> to_boxes(const std::vector<CellRange>& cells, const std::vector<Axis>& axes) {
    std::vector<Box> out;
    out.reserve(cells.size());
    for (const CellRange& c : cells) {
        Box b(axes.size());
        for (std::size_t d = 0; d < axes.size(); ++d) b[d] = axes[d].span(c.first[d], c.last[d]);
        out.push_back(std::move(b));
    }
    return out;
}

void check_dim(std::size_t a, std::size_t b) {
    if (a != b) throw Error("region dimension mismatch");
}

}  // namespace

Region Region::whole(std::size_t dim) {
    return from_box(whole_box(dim));
}

Region Region::from_box(Box box) {
    Region r(box.size());
    if (!box_empty(box)) r.boxes_.push_back(std::move(box));
    return r;
}

bool Region::contains(std::span<const double> z) const {
    return std::any_of(boxes_.begin(), boxes_.end(), [&](const Box& b) { return box_contains(b, z); });
}

bool Region::empty() const {
    return std::all_of(boxes_.begin(), boxes_.end(), [](const Box& b) { return box_empty(b); });
}

Region Region::unite(const Region& other) const {
    check_dim(dim_, other.dim_);
    Region out = *this;
    for (const Box& b : other.boxes_) {
        if (!box_empty(b)) out.boxes_.push_back(b);
    }
    return out;
}

Region Region::intersect(const Region& other) const {
    check_dim(dim_, other.dim_);
    Region out(dim_);
    for (const Box& a : boxes_) {
        for (const Box& b : other.boxes_) {
            Box c = box_intersect(a, b);
            if (!box_empty(c)) out.boxes_.push_back(std::move(c));
        }
    }
    return out;
}

Region Region::complement_within(const Box& domain) const {
    check_dim(dim_, domain.size());
    const std::vector<Box> dom{domain};
    const auto axes = build_grid(dim_, {&boxes_, &dom});
    auto cells = collect_cells(axes, [&](std::span<const double> p) { return box_contains(domain, p) && !contains(p); });
    Region out(dim_);
    out.boxes_ = to_boxes(merge_cells(std::move(cells), dim_), axes);
    return out;
}

bool Region::subset_of(const Region& other) const {
    check_dim(dim_, other.dim_);
    return intersect(other.complement_within(whole_box(dim_))).empty();
}

bool Region::same_set(const Region& other) const {
    return subset_of(other) && other.subset_of(*this);
}

Region Region::normalized() const {
    const auto axes = build_grid(dim_, {&boxes_});
    auto cells = collect_cells(axes, [&](std::span<const double> p) { return contains(p); });
    Region out(dim_);
    out.boxes_ = to_boxes(merge_cells(std::move(cells), dim_), axes);
    return out;
}

std::optional<Box> Region::as_box() const {
    Region n = normalized();
    if (n.boxes_.size() != 1) return std::nullopt;
    return n.boxes_.front();
}

std::string Region::str() const {
    Region n = normalized();
    if (n.boxes_.empty()) return "{}";
    std::string s;
    for (std::size_t i = 0; i < n.boxes_.size(); ++i) {
        if (i) s += " | ";
        for (std::size_t d = 0; d < dim_; ++d) {
            if (d) s += " x ";
            s += n.boxes_[i][d].str();
        }
    }
    return s;
}

}  // namespace fha
