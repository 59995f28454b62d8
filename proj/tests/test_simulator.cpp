#include "fha/error.hpp"
#include "fha/model_io.hpp"
#include "fha/planner.hpp"
#include "fha/simulator.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace fha;

namespace {

Path path_of(const Automaton& a, std::initializer_list<const char*> names) {
    Path p;
    for (const char* n : names) p.push_back(*a.find_transition(n));
    return p;
}

Plan plan_along(const ModelDefinition& m, Path path, int degree = 1) {
    PlanRequest r = default_request(m);
    r.path = std::move(path);
    r.degree = degree;
    return plan(m, r);
}

SimTrace replay(const ModelDefinition& m, const Plan& p, double h = 0.016) {
    SimConfig c;
    c.h = h;
    return simulate(m, p.initial_state, p.x0, schedule_from_plan(m, p), c);
}

Path builtin_path(const Automaton& a) {
    return path_of(a, {"e1", "e6", "e11", "e5", "e7", "e2", "e9", "e10", "e3", "e12", "e8", "e4"});
}

}  // namespace

TEST_CASE("closed tank drains like the closed-form solution") {
    const ModelDefinition m = one_tank();
    const SimTrace tr = simulate(m, m.initial.state, {0.8}, InputSchedule::constant({0.0}, 3.0, {false}));
    CHECK(tr.events.empty());
    REQUIRE_FALSE(tr.samples.empty());
    CHECK(tr.samples.back().t == doctest::Approx(3.0));
    double previous = INFINITY;
    for (const TraceSample& s : tr.samples) {
        // d/dt sqrt(l) = -c_out / 2
        const double root = std::sqrt(0.8) - 0.25 * s.t;
        CHECK(s.x[0] == doctest::Approx(root * root).epsilon(1e-6));
        CHECK(s.x[0] <= previous);
        CHECK(s.k == 0);
        previous = s.x[0];
    }
}

TEST_CASE("filling past l0 fires at the reference crossing time") {
    const ModelDefinition m = one_tank();
    const SimTrace tr = simulate(m, m.initial.state, {0.8}, InputSchedule::constant({2.0}, 20.0, {false}));
    REQUIRE(tr.events.size() == 1);
    const TraceEvent& e = tr.events[0];
    CHECK(m.automaton.transition(e.transition).name == "e2");
    const double expected = oracle::crossing_time([](double l) { return 2.0 - 0.5 * std::sqrt(l); }, 0.8, 1e-3, 20.0,
                                                  [](double l) { return l > 5.0; });
    CHECK(e.t == doctest::Approx(expected).epsilon(1e-7));
    CHECK(e.x_after == e.x_before);
    CHECK(e.z_before[0] > 5.0);
    CHECK(e.z_before[0] == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(tr.samples.back().state == *m.automaton.find_state("d3"));
    CHECK(tr.samples.back().k == 1);
}

TEST_CASE("network replay of the built-in path") {
    const ModelDefinition m = dc_network();
    const Plan p = plan_along(m, builtin_path(m.automaton));
    const SimTrace tr = replay(m, p);
    CHECK(tr.path() == p.path);
    for (std::size_t i = 0; i < tr.events.size(); ++i) {
        CHECK(tr.events[i].t == doctest::Approx(16.0 * static_cast<double>(i + 1)).epsilon(1e-9));
        const Transition& e = m.automaton.transition(tr.events[i].transition);
        const bool closes = !m.automaton.state(e.head).invariant_inputs.at(0) &&
                            m.automaton.state(e.tail).invariant_inputs.at(0);
        if (closes) CHECK(std::abs(tr.events[i].x_after[0] - tr.events[i].z_before[0]) <= 1e-9);
    }
    const PlanComparison c = compare_trace_to_plan(m, tr, p);
    CHECK(c.sequence_match);
    CHECK(c.max_output_deviation <= 1e-3);
    CHECK(c.passed(1e-3, 0.1));
}

TEST_CASE("tank replay of a fill and drain cycle") {
    const ModelDefinition m = one_tank();
    const Plan p = plan_along(m, path_of(m.automaton, {"e1", "e4"}), 3);
    const SimTrace tr = replay(m, p);
    const PlanComparison c = compare_trace_to_plan(m, tr, p);
    CHECK(c.sequence_match);
    CHECK(c.max_time_deviation <= 1e-9);
    CHECK(c.max_output_deviation <= 1e-3);

    // Sample counters advance by one per event.
    std::size_t seen = 0;
    for (const TraceSample& s : tr.samples) {
        while (seen < tr.events.size() && tr.events[seen].t < s.t) ++seen;
        CHECK((s.k == seen || (seen < tr.events.size() && s.t == tr.events[seen].t)));
    }
}

TEST_CASE("output error shrinks with the step size") {
    const ModelDefinition m = one_tank();
    PlanRequest r = default_request(m);
    r.path = Path{};
    r.z_final = {3.0};
    r.degree = 3;
    const Plan p = plan(m, r);
    const double coarse = compare_trace_to_plan(m, replay(m, p, 0.064), p).max_output_deviation;
    const double fine = compare_trace_to_plan(m, replay(m, p, 0.016), p).max_output_deviation;
    CHECK(fine > 0.0);
    // Fourth-order method: a quarter of the step gives far more than a 4x gain.
    CHECK(fine * 16.0 < coarse);
    CHECK(fine <= 1e-3);
}

TEST_CASE("zeno chains are cut off") {
    const ModelDefinition m = load_model_file(FHA_TEST_DATA "/zeno_tank.json");
    InputSchedule s({InputSchedule::constant({0.1}, 2.0, {false}).pieces()}, {{1.0, 0, true}}, {false});
    CHECK_THROWS_AS(static_cast<void>(simulate(m, m.initial.state, {0.8}, s)), ZenoError);
    SimConfig c;
    c.chain_cap = 7;
    try {
        static_cast<void>(simulate(m, m.initial.state, {0.8}, s, c));
        FAIL("expected a ZenoError");
    } catch (const ZenoError& e) {
        CHECK(std::string(e.what()).find("7") != std::string::npos);
    }
}

TEST_CASE("overlapping guards are reported during simulation") {
    const ModelDefinition m = load_model_file(FHA_TEST_DATA "/tank_mutated_e2.json");
    InputSchedule s({InputSchedule::constant({0.1}, 2.0, {false}).pieces()}, {{1.0, 0, true}}, {false});
    CHECK_THROWS_AS(static_cast<void>(simulate(m, m.initial.state, {0.8}, s)), NondeterminismError);
}

TEST_CASE("the ideal trace reproduces its plan") {
    const ModelDefinition m = one_tank();
    const Plan p = plan_along(m, builtin_path(m.automaton));
    SimTrace ideal = ideal_trace(m, p, 20);
    const PlanComparison c = compare_trace_to_plan(m, ideal, p);
    CHECK(c.sequence_match);
    CHECK(c.max_output_deviation <= 1e-12);
    CHECK(c.max_time_deviation <= 1e-12);

    ideal.events[3].transition = *m.automaton.find_transition("e6");
    const PlanComparison bad = compare_trace_to_plan(m, ideal, p);
    CHECK_FALSE(bad.sequence_match);
    CHECK(bad.first_mismatch == 3);
    CHECK_FALSE(bad.passed(1.0, 1.0));
}

TEST_CASE("trace files round-trip") {
    const ModelDefinition m = dc_network();
    const Plan p = plan_along(m, path_of(m.automaton, {"e1", "e4"}));
    const SimTrace tr = replay(m, p, 0.5);
    const std::string csv = trace_to_csv(m, tr);
    CHECK(csv.rfind("t,k,state,v_0,v_1,x_0,x_1,z_0,z_1,u_0,u_1\n", 0) == 0);
    const std::string events = events_to_csv(m, tr);
    CHECK(events.rfind("t,chain,transition,x_before_0,x_before_1,x_after_0,x_after_1\n", 0) == 0);
    const SimTrace back = trace_from_csv(m, csv, events);
    REQUIRE(back.samples.size() == tr.samples.size());
    for (std::size_t i = 0; i < tr.samples.size(); ++i) {
        CHECK(back.samples[i].t == tr.samples[i].t);
        CHECK(back.samples[i].k == tr.samples[i].k);
        CHECK(back.samples[i].state == tr.samples[i].state);
        CHECK(back.samples[i].v == tr.samples[i].v);
        CHECK(back.samples[i].x == tr.samples[i].x);
        CHECK(back.samples[i].z == tr.samples[i].z);
        CHECK(back.samples[i].u == tr.samples[i].u);
    }
    REQUIRE(back.events.size() == tr.events.size());
    for (std::size_t i = 0; i < tr.events.size(); ++i) {
        CHECK(back.events[i].t == tr.events[i].t);
        CHECK(back.events[i].transition == tr.events[i].transition);
        CHECK(back.events[i].x_before == tr.events[i].x_before);
        CHECK(back.events[i].x_after == tr.events[i].x_after);
    }
    CHECK_THROWS_AS(static_cast<void>(trace_from_csv(m, "t,k\n1,2\n", events)), Error);
    CHECK_THROWS_AS(static_cast<void>(trace_from_csv(m, csv + "1,2\n", events)), Error);
}

TEST_CASE("input pieces supply derivatives") {
    // u(t) = 1 + 2 (t - 1) + 3 (t - 1)^2 on [1, 3]
    const InputPiece poly = polynomial_piece(1.0, 3.0, {{1.0, 2.0, 3.0}});
    const auto j = poly.jet(2.0, 3);
    CHECK(j[0][0] == doctest::Approx(6.0));
    CHECK(j[1][0] == doctest::Approx(8.0));
    CHECK(j[2][0] == doctest::Approx(6.0));
    CHECK(j[3][0] == doctest::Approx(0.0));

    const InputPiece fn = function_piece(0.0, 4.0, [](double t) { return Vector{std::sin(t)}; });
    const auto k = fn.jet(1.0, 2);
    CHECK(k[0][0] == doctest::Approx(std::sin(1.0)));
    CHECK(k[1][0] == doctest::Approx(std::cos(1.0)).epsilon(1e-6));
    CHECK(k[2][0] == doctest::Approx(-std::sin(1.0)).epsilon(1e-4));
}

TEST_CASE("schedules reject inconsistent pieces and events") {
    const InputPiece a = polynomial_piece(0.0, 1.0, {{1.0}});
    const InputPiece b = polynomial_piece(1.5, 2.0, {{1.0}});
    CHECK_THROWS_AS(InputSchedule({a, b}, {}, {false}), Error);
    CHECK_THROWS_AS(InputSchedule({}, {}, {false}), Error);
    CHECK_THROWS_AS(InputSchedule({a}, {{0.5, 0, true}, {0.2, 0, false}}, {false}), Error);
    CHECK_THROWS_AS(InputSchedule({a}, {{0.5, 3, true}}, {false}), Error);

    const InputPiece c = polynomial_piece(1.0, 2.0, {{5.0}});
    const InputSchedule s({a, c}, {{1.0, 0, true}}, {false});
    CHECK(s.piece_at(1.0, Side::Left) == 0);
    CHECK(s.piece_at(1.0, Side::Right) == 1);
    CHECK(s.jet(1.0, 0, Side::Right)[0][0] == 5.0);
    CHECK(s.end_time() == 2.0);
    const std::vector<double> bp = s.breakpoints();
    CHECK(std::find(bp.begin(), bp.end(), 1.0) != bp.end());
    CHECK(std::find(bp.begin(), bp.end(), 2.0) != bp.end());
}

TEST_CASE("plans become input schedules") {
    const ModelDefinition m = one_tank();
    const Plan p = plan_along(m, path_of(m.automaton, {"e1", "e4"}));
    const InputSchedule s = schedule_from_plan(m, p);
    CHECK(s.pieces().size() == 3);
    REQUIRE(s.events().size() == 2);
    CHECK(s.events()[0].time == 16.0);
    CHECK(s.events()[0].value);
    CHECK_FALSE(s.events()[1].value);
    CHECK(s.jet(8.0, 0, Side::Left)[0] == plan_input(m, p.phases[0], 8.0));
}
