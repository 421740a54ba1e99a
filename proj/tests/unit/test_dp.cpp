#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tandem/dp.hpp"
#include "tandem/value.hpp"

using namespace tandem;

namespace {

const NetworkParams kOne = NetworkParams::make(1.0, {2.0}, {1.0}, 1.0);
const NetworkParams kTwo = NetworkParams::make(1.0, {2.0, 1.0}, {1.0, 1.0}, 1.0);

double sup_diff(const Vector& a, const Vector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

}  // namespace

TEST_CASE("lattice sizes") {
    CHECK(Lattice(kTwo, 4).size() == 4 * 5);
    CHECK(Lattice(kOne, 3).dims() == std::vector<std::size_t>{3});
    const NetworkParams odd = NetworkParams::make(1.0, {2.0, 1.0}, {0.55, 0.55}, 1.0);
    const Lattice l(odd, 4);  // 4 * 0.55 = 2.2
    CHECK(l.dims() == std::vector<std::size_t>{3, 3});
    CHECK(l.point(l.index({2, 2})) == Vector{0.5, 0.5});
    const NetworkParams third = NetworkParams::make(1.0, {1.0, 1.0}, {0.3, 0.3}, 1.0);
    const Lattice t(third, 10);
    CHECK(t.dims() == std::vector<std::size_t>{3, 4});
    CHECK(t.point(t.index({0, 3}))[1] == 0.3);
}

TEST_CASE("lattice rounding") {
    const Lattice l(kTwo, 4);
    CHECK(l.nearest({0.26, 0.49}) == l.index({1, 2}));
    CHECK_FALSE(l.nearest({1.0, 0.0}).has_value());
    CHECK_THROWS_AS(l.index({4, 0}), ValidationError);
}

TEST_CASE("transitions") {
    const Lattice l(kTwo, 4);
    const auto origin = transitions(l, l.index({0, 0}), 3u, kTwo);
    REQUIRE(origin.size() == 1);
    CHECK(origin[0].event == -1);
    CHECK(origin[0].target == l.index({1, 0}));

    const auto blocked = transitions(l, l.index({1, 4}), 3u, kTwo);
    REQUIRE(blocked.size() == 3);
    CHECK_FALSE(blocked[1].target.has_value());  // serving 1 overflows queue 2
    CHECK(blocked[2].target == l.index({1, 3}));

    const Lattice one(kOne, 1);
    const auto e = transitions(one, 0, 1u, kOne);
    REQUIRE(e.size() == 1);
    CHECK_FALSE(e[0].target.has_value());
    CHECK_THROWS_AS(transitions(one, 5, 1u, kOne), ValidationError);
}

TEST_CASE("hand-solved fixed points") {
    const DPResult r1 = solve(kOne, 1);
    CHECK(r1.W[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r1.Vn[0] == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    const DPResult r2 = solve(kOne, 2);
    CHECK(r2.W[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-10));
    CHECK(r2.W[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(r2.Vn[0] == doctest::Approx(0.5 * std::log(6.0)).epsilon(1e-10));
    CHECK(r2.policy[1] == 1u);
}

TEST_CASE("single station agrees with the tridiagonal oracle") {
    for (int n : {3, 8, 20}) {
        const DPResult r = solve(kOne, static_cast<std::size_t>(n));
        const auto W = oracle::dp_single_station(1.0, 2.0, 1.0, 1.0, n);
        for (std::size_t k = 0; k < W.size(); ++k) {
            CHECK(std::abs(r.W[k] - W[k]) <= 1e-10 * W[k] + 1e-14);
        }
        for (std::size_t k = 1; k < W.size(); ++k) {
            CHECK(r.policy[k] == 1u);
        }
    }
}

TEST_CASE("two stations agree with policy iteration") {
    for (int n : {2, 4}) {
        const DPResult r = solve(kTwo, static_cast<std::size_t>(n));
        const auto W = oracle::optimal(kTwo, n);
        REQUIRE(W.size() == r.W.size());
        for (std::size_t k = 0; k < W.size(); ++k) {
            CHECK(std::abs(r.W[k] - W[k]) <= 1e-10);
        }
    }
}

TEST_CASE("Bellman operator: bounds, monotonicity and contraction") {
    const JumpTable table(kTwo, 4);
    const double rho = contraction_factor(kTwo);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(1e-3, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Vector a(table.lattice.size()), b(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = u(rng);
            b[i] = std::min(1.0, a[i] + 0.2 * u(rng));
        }
        Vector ta, tb;
        bellman_update(table, a, ta);
        bellman_update(table, b, tb);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(ta[i] > 0.0);
            CHECK(ta[i] <= 1.0);
            CHECK(ta[i] <= tb[i] + 1e-15);
        }
        CHECK(sup_diff(ta, tb) <= rho * sup_diff(a, b) + 1e-15);
    }
    Vector ones(table.lattice.size(), 1.0), t;
    bellman_update(table, ones, t);
    CHECK(t[table.lattice.index({0, 0})] <= 1.0);
}

TEST_CASE("vertex controls suffice") {
    const DPResult r = solve(kTwo, 4);
    const JumpTable table(kTwo, 4);
    for (std::size_t idx = 0; idx < table.lattice.size(); ++idx) {
        double vertex = 1e300;
        for (ControlMask m = 0; m < 4; ++m) {
            vertex = std::min(vertex, bellman_ratio(table, r.W, idx, m));
        }
        for (int a = 0; a <= 10; ++a) {
            for (int b = 0; b <= 10; ++b) {
                const double u[2] = {a / 10.0, b / 10.0};
                const std::size_t arr = table.arrival[idx];
                double num = kTwo.lambda * (arr == kExit ? 1.0 : r.W[arr]);
                double den = kTwo.c + kTwo.lambda;
                for (std::size_t i = 0; i < 2; ++i) {
                    const std::size_t t = table.service[idx * 2 + i];
                    if (t == kNoEdge) {
                        continue;
                    }
                    num += u[i] * kTwo.mu[i] * (t == kExit ? 1.0 : r.W[t]);
                    den += u[i] * kTwo.mu[i];
                }
                CHECK(num / den >= vertex - 1e-10);
            }
        }
    }
}

TEST_CASE("warm and cold starts reach the same table") {
    DPOptions cold;
    DPOptions warm;
    warm.warm_start = true;
    const DPResult a = solve(kTwo, 8, cold);
    const DPResult b = solve(kTwo, 8, warm);
    CHECK(a.converged);
    CHECK(b.converged);
    CHECK(sup_diff(a.W, b.W) <= 2e-10);
    CHECK(b.iterations <= a.iterations);
}

TEST_CASE("iteration limit is reported") {
    DPOptions o;
    o.max_iter = 3;
    const DPResult r = solve(kTwo, 8, o);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 3);
    CHECK(r.final_delta > 0.0);
    CHECK_THROWS_AS(convergence_study(kTwo, {8}, {0.0, 0.0}, o), IterationLimitError);
}

TEST_CASE("policy evaluation") {
    const DPResult r = solve(kTwo, 4);
    const PolicyEvaluation same = evaluate_policy(kTwo, 4, r.policy);
    CHECK(sup_diff(same.W, r.W) <= 2e-10);

    const PolicyEvaluation idle = evaluate_policy(kOne, 1, PolicyTable{0u});
    CHECK(idle.W[0] == doctest::Approx(0.5).epsilon(1e-12));

    const Lattice l(kTwo, 4);
    const PolicyEvaluation all = evaluate_policy(kTwo, 4, PolicyTable(l.size(), 3u));
    const auto oracle_all = oracle::evaluate(kTwo, 4, [](std::size_t) { return std::vector<int>{1, 1}; });
    for (std::size_t k = 0; k < l.size(); ++k) {
        CHECK(r.W[k] <= all.W[k] + 1e-12);
        CHECK(std::abs(all.W[k] - oracle_all[k]) <= 1e-10);
    }
    CHECK_THROWS_AS(evaluate_policy(kTwo, 4, PolicyTable(3, 0u)), ValidationError);
}

TEST_CASE("V^n is nonnegative and the overflow face gives zero") {
    const DPResult r = solve(kTwo, 4);
    for (double v : r.Vn) {
        CHECK(v >= 0.0);
    }
    const auto rows = convergence_study(kTwo, {1, 2, 4}, {1.0, 0.5});
    for (const ConvergenceRow& row : rows) {
        CHECK(row.Vn == 0.0);
        CHECK(row.V == 0.0);
        CHECK(row.gap == 0.0);
    }
}

TEST_CASE("single-station sequence increases toward the limit") {
    const auto rows = convergence_study(kOne, {1, 2, 4, 8, 16}, {0.0});
    for (std::size_t k = 1; k < rows.size(); ++k) {
        CHECK(rows[k].Vn > rows[k - 1].Vn);
        CHECK(rows[k].gap < rows[k - 1].gap);
    }
    CHECK(rows.back().V == doctest::Approx(1.2279471772995154));
}

TEST_CASE("serving beats idling station 1 where station 1 is the bottleneck") {
    // Restricted to x_2 <= z_2 / 2: next to the full second buffer, serving
    // station 1 pushes queue 2 over its face and idling is better at small n.
    const ExplicitSolution sol(kTwo);
    for (std::size_t n : {2u, 4u, 8u}) {
        const Lattice l(kTwo, n);
        const PolicyEvaluation all = evaluate_policy(kTwo, n, PolicyTable(l.size(), 3u));
        const PolicyEvaluation idle1 = evaluate_policy(kTwo, n, PolicyTable(l.size(), 2u));
        std::size_t compared = 0;
        for (std::size_t k = 0; k < l.size(); ++k) {
            const Vector x = l.point(k);
            if (sol.value(x).bottleneck == 0 && x[1] <= 0.5 * kTwo.z[1]) {
                CHECK(all.W[k] <= idle1.W[k]);
                ++compared;
            }
        }
        CHECK(compared > 0);
    }
}
