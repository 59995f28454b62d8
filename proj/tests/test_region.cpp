#include "fha/format.hpp"
#include "fha/interval.hpp"
#include "fha/region.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fha;

namespace {

bool in_box(const Box& b, const std::vector<double>& z) {
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (!oracle::in_interval(b[i], z[i])) return false;
    }
    return true;
}

Interval random_interval(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> end(0, 4);
    std::uniform_int_distribution<int> coin(0, 1);
    int lo = end(rng);
    int hi = end(rng);
    if (lo > hi) std::swap(lo, hi);
    Interval iv{static_cast<double>(lo), static_cast<double>(hi), coin(rng) == 1, coin(rng) == 1};
    if (lo == 0 && coin(rng)) {
        iv.lo = -INFINITY;
        iv.lo_closed = false;
    }
    if (hi == 4 && coin(rng)) {
        iv.hi = INFINITY;
        iv.hi_closed = false;
    }
    return iv;
}

}  // namespace

TEST_CASE("relations map to half-lines with the right closedness") {
    const Interval lt = Interval::from_relation(Relation::Less, 5.0);
    CHECK(lt.contains(4.999));
    CHECK_FALSE(lt.contains(5.0));
    CHECK(lt.str() == "(-inf, 5)");

    const Interval ge = Interval::from_relation(Relation::GreaterEqual, 5.0);
    CHECK(ge.contains(5.0));
    CHECK_FALSE(ge.contains(std::nextafter(5.0, 0.0)));
    CHECK(ge.str() == "[5, inf)");

    CHECK(Interval::from_relation(Relation::LessEqual, 2.0).str() == "(-inf, 2]");
    CHECK(Interval::from_relation(Relation::Greater, 2.0).str() == "(2, inf)");
}

TEST_CASE("relation names parse back") {
    for (Relation r : {Relation::Less, Relation::LessEqual, Relation::Greater, Relation::GreaterEqual}) {
        CHECK(parse_relation(to_string(r)) == r);
    }
    CHECK_FALSE(parse_relation("=<").has_value());
}

TEST_CASE("degenerate intervals") {
    CHECK(Interval{1.0, 1.0, true, true}.contains(1.0));
    CHECK(Interval{1.0, 1.0, true, false}.empty());
    CHECK(Interval{2.0, 1.0, true, true}.empty());
    CHECK(Interval::whole().is_whole());
    CHECK(Interval::closed(0, 5).intersect(Interval::from_relation(Relation::Greater, 5)).empty());
}

TEST_CASE("complement of the tank's low band within [0, 10]") {
    const Region low = Region::from_box({Interval::closed(0.0, 5.0)});
    const Region high = low.complement_within({Interval::closed(0.0, 10.0)});
    CHECK(high.str() == "(5, 10]");
    CHECK_FALSE(high.contains(std::vector<double>{5.0}));
    CHECK(high.contains(std::vector<double>{std::nextafter(5.0, 6.0)}));
    CHECK(low.unite(high).same_set(Region::from_box({Interval::closed(0.0, 10.0)})));
    CHECK(low.intersect(high).empty());
    CHECK(Region(1).str() == "{}");
}

TEST_CASE("normalisation merges adjacent boxes") {
    const Region a = Region::from_box({Interval{0, 1, true, false}, Interval::closed(0, 1)});
    const Region b = Region::from_box({Interval{1, 2, true, true}, Interval::closed(0, 1)});
    const Region u = a.unite(b);
    REQUIRE(u.as_box().has_value());
    CHECK(u.str() == "[0, 2] x [0, 1]");
    CHECK(u.normalized().boxes().size() == 1);
}

TEST_CASE("set operations agree with pointwise membership on random 2-D regions") {
    std::mt19937_64 rng(20240611);
    const Box domain{Interval::closed(-1, 5), Interval{-INFINITY, INFINITY, false, false}};
    std::vector<double> axis;
    for (int k = -2; k <= 6; ++k) {
        axis.push_back(k);
        axis.push_back(k + 0.5);
    }
    const auto points = oracle::grid({axis, axis});
    for (int trial = 0; trial < 150; ++trial) {
        std::vector<Box> boxes_a;
        std::vector<Box> boxes_b;
        Region a(2);
        Region b(2);
        for (int i = 0; i < 3; ++i) {
            boxes_a.push_back({random_interval(rng), random_interval(rng)});
            boxes_b.push_back({random_interval(rng), random_interval(rng)});
            a = a.unite(Region::from_box(boxes_a.back()));
            b = b.unite(Region::from_box(boxes_b.back()));
        }
        const Region u = a.unite(b);
        const Region n = a.intersect(b);
        const Region c = a.complement_within(domain);
        const Region norm = u.normalized();
        for (const auto& z : points) {
            bool in_a = false;
            bool in_b = false;
            for (const Box& box : boxes_a) in_a = in_a || in_box(box, z);
            for (const Box& box : boxes_b) in_b = in_b || in_box(box, z);
            REQUIRE(a.contains(z) == in_a);
            REQUIRE(u.contains(z) == (in_a || in_b));
            REQUIRE(norm.contains(z) == (in_a || in_b));
            REQUIRE(n.contains(z) == (in_a && in_b));
            REQUIRE(c.contains(z) == (in_box(domain, z) && !in_a));
        }
        CHECK(n.subset_of(a));
        CHECK(a.subset_of(u));
        CHECK(u.same_set(norm));
    }
}

TEST_CASE("doubles print in shortest round-trip form") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(16.0) == "16");
    CHECK(format_double(-0.0) == "0");
    CHECK(format_double(INFINITY) == "inf");
    CHECK(format_double(-INFINITY) == "-inf");
    const double x = 1.0 / 3.0;
    CHECK(std::stod(format_double(x)) == x);
    const double v[] = {1.5, -2.0, 1e-9};
    CHECK(join_doubles(v, ';') == "1.5;-2;1e-09");
}
