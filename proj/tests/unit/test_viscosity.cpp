#include <doctest.h>

#include <cmath>

#include "tandem/hamiltonian.hpp"
#include "tandem/viscosity.hpp"

using namespace tandem;

namespace {

const NetworkParams kTwo = NetworkParams::make(1.0, {2.0, 1.0}, {1.0, 1.0}, 1.0);
const NetworkParams kThree = NetworkParams::make(1.0, {3.0, 1.0, 2.0}, {1.0, 1.0, 1.0}, 1.0);

CheckOptions quick() {
    CheckOptions o;
    o.samples = 500;
    return o;
}

}  // namespace

TEST_CASE("interior points give one extreme point per index of A(x)") {
    const ExplicitSolution sol(kTwo);
    const auto ext = superdiff_extremes({0.5, 0.5}, sol);
    REQUIRE(ext.size() == sol.a_of_x({0.5, 0.5}).size());
    for (const ExtremePoint& e : ext) {
        CHECK(e.r == static_cast<std::ptrdiff_t>(e.k));
        CHECK(std::abs(h_value(e.k, e.r, sol)) <= 1e-12);
    }
}

TEST_CASE("extreme points on the empty face of station 1") {
    const ExplicitSolution sol(kTwo);
    const auto ext = superdiff_extremes({0.0, 0.5}, sol);
    REQUIRE(ext.size() == 3);
    CHECK(ext[0].k == 0);
    CHECK(ext[0].s == -1);
    CHECK(ext[0].t == 1);
    CHECK(ext[0].r == kArrivalTerm);
    CHECK(h_value(0, kArrivalTerm, sol) == kTwo.c);
    CHECK(ext[0].delta == Vector{sol.beta(0), 0.0});
    CHECK(ext[2].k == 1);
    CHECK(ext[2].r == 1);
}

TEST_CASE("closed-form h matches the concave function and H") {
    const ExplicitSolution sol(kThree);
    for (const Vector& x : {Vector{0.0, 0.0, 0.0}, Vector{0.0, 1.0, 0.5}, Vector{0.5, 0.0, 1.0}, Vector{0.0, 0.5, 0.0}}) {
        for (const ExtremePoint& e : superdiff_extremes(x, sol)) {
            Vector nu(3, 0.0);
            nu[e.k] = 1.0;
            const double h = h_value(e.k, e.r, sol);
            CHECK(h_concave(nu, e.delta, sol) == doctest::Approx(h).epsilon(1e-12));
            CHECK(hamiltonian(superdiff_element(nu, e.delta, sol), kThree) == doctest::Approx(h).epsilon(1e-12));
            CHECK(h >= -1e-12);
        }
    }
}

TEST_CASE("h goes negative once the gamma constraint is dropped") {
    const NetworkParams one = NetworkParams::make(1.0, {2.0}, {1.0}, 1.0);
    const ExplicitSolution sol(one);
    const double beta = sol.beta(0);
    CHECK(h_concave({1.0}, {2.0 * beta}, sol) < 0.0);
}

TEST_CASE("superdifferential checks pass at face and corner points") {
    const ExplicitSolution sol(kThree);
    for (const Vector& x : {Vector{0.0, 0.0, 0.0}, Vector{0.0, 1.0, 1.0}, Vector{0.5, 1.0, 0.0}, Vector{0.2, 0.4, 0.6}}) {
        const CheckReport r = check_superdifferential(x, sol, quick());
        CHECK_MESSAGE(r.pass, r.violation);
        CHECK(r.samples >= 1);
        const CheckReport relaxed = check_superdiff_relaxed(x, sol, quick());
        CHECK_MESSAGE(relaxed.pass, relaxed.violation);
    }
}

TEST_CASE("a wider rejection box changes nothing") {
    const ExplicitSolution sol(kTwo);
    CheckOptions o = quick();
    o.box_inflation = 3.0;
    const CheckReport r = check_superdifferential({0.0, 0.0}, sol, o);
    CHECK_MESSAGE(r.pass, r.violation);
    CHECK(r.attempts > r.samples);
}

TEST_CASE("degenerate polytope on the blockable corner") {
    const ExplicitSolution sol(kTwo);
    const CheckReport r = check_superdifferential({0.0, 1.0}, sol, quick());
    CHECK_MESSAGE(r.pass, r.violation);
    CHECK(r.samples == 500);
    CHECK(check_superdiff_relaxed({0.0, 1.0}, sol, quick()).skipped);
}

TEST_CASE("subdifferential") {
    const ExplicitSolution sol(kTwo);
    CHECK_THROWS_AS(check_subdifferential({0.5, 1.0}, sol), ValidationError);
    const CheckReport r = check_subdifferential({0.0, 0.3}, sol, quick());
    CHECK_MESSAGE(r.pass, r.violation);
    CHECK(r.samples == 500);
    CHECK(check_subdifferential({0.5, 0.5}, sol, quick()).samples == 1);
    const double x2 = 1.5 - 0.5 * sol.beta(0) / sol.beta(1);
    CHECK(check_subdifferential({0.5, x2}, sol, quick()).skipped);
}

TEST_CASE("scan on a coarse grid") {
    const PdeScanSummary s = pde_scan(ExplicitSolution(kThree), 5, quick());
    CHECK(s.pass);
    CHECK(s.points == 125);
    CHECK(s.boundary_o_points == 25);
    CHECK(s.interior_points == 27);
    CHECK(s.boundary_o_max_abs_V == 0.0);
    CHECK(s.max_residual_interior <= 1e-10);
    CHECK(s.min_extreme_h >= -1e-12);
}

TEST_CASE("scan is reproducible") {
    const ExplicitSolution sol(kTwo);
    const PdeScanSummary a = pde_scan(sol, 6, quick());
    const PdeScanSummary b = pde_scan(sol, 6, quick());
    CHECK(a.max_h_violation == b.max_h_violation);
    CHECK(a.superdiff_samples == b.superdiff_samples);
}
