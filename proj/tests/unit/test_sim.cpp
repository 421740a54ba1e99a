#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tandem/dp.hpp"
#include "tandem/sim.hpp"

using namespace tandem;

namespace {

const NetworkParams kOne = NetworkParams::make(1.0, {2.0}, {1.0}, 1.0);
const NetworkParams kTwo = NetworkParams::make(1.0, {2.0, 1.0}, {1.0, 1.0}, 1.0);

}  // namespace

TEST_CASE("pairwise sum") {
    std::vector<double> v(1000, 0.1);
    CHECK(pairwise_sum(v.data(), v.size()) == doctest::Approx(100.0).epsilon(1e-14));
    CHECK(pairwise_sum(v.data(), 0) == 0.0);
}

TEST_CASE("replay determinism") {
    const TrajectoryOutcome a = simulate_path(kTwo, 4, PolicySpec::serve_all(), {0.0, 0.0}, 42);
    const TrajectoryOutcome b = simulate_path(kTwo, 4, PolicySpec::serve_all(), {0.0, 0.0}, 42);
    CHECK(a.sigma == b.sigma);
    CHECK(a.jumps == b.jumps);
    CHECK(a.sigma > 0.0);
    CHECK(a.log_weight == 0.0);
    const Estimate e1 = mc_estimate(kTwo, 2, PolicySpec::serve_all(), {0.0, 0.0}, 2000, 9);
    const Estimate e2 = mc_estimate(kTwo, 2, PolicySpec::serve_all(), {0.0, 0.0}, 2000, 9);
    CHECK(e1.mean == e2.mean);
    CHECK(e1.std_error == e2.std_error);
}

TEST_CASE("one-state chain: mean of exp(-c sigma) is lambda/(c+lambda)") {
    const Estimate e = mc_estimate(kOne, 1, PolicySpec::serve_all(), {0.0}, 40000, 3);
    CHECK(std::abs(e.mean - 0.5) <= 3.0 * e.std_error);
    CHECK(e.exits_o == e.n_traj);
}

TEST_CASE("idling every station gives an Erlang overflow time") {
    for (std::size_t n : {1u, 2u, 3u}) {
        const Estimate e = mc_estimate(kTwo, n, PolicySpec::idle_all(), {0.0, 0.0}, 40000, 5);
        const double exact = std::pow(kTwo.lambda / (kTwo.lambda + kTwo.c), static_cast<double>(n));
        CHECK(std::abs(e.mean - exact) <= 3.0 * e.std_error);
        CHECK(e.exits_c == 0);
    }
}

TEST_CASE("naive estimate matches policy evaluation") {
    const Lattice l(kTwo, 2);
    const PolicyEvaluation ev = evaluate_policy(kTwo, 2, PolicyTable(l.size(), 3u));
    const Estimate e = mc_estimate(kTwo, 2, PolicySpec::serve_all(), {0.0, 0.0}, 40000, 8);
    CHECK(std::abs(e.mean - ev.W[0]) <= 3.0 * e.std_error);
}

TEST_CASE("standard error shrinks like one over root n") {
    const Estimate a = mc_estimate(kOne, 2, PolicySpec::serve_all(), {0.0}, 20000, 1);
    const Estimate b = mc_estimate(kOne, 2, PolicySpec::serve_all(), {0.0}, 40000, 1);
    CHECK(b.std_error / a.std_error == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.05));
}

TEST_CASE("identity tilt reproduces the naive estimator bit for bit") {
    const Estimate naive = mc_estimate(kTwo, 4, PolicySpec::serve_all(), {0.0, 0.0}, 5000, 77);
    const Estimate tilted = is_estimate(kTwo, 4, PolicySpec::serve_all(), {0.0, 0.0}, 5000, 77, TiltKind::identity);
    CHECK(naive.mean == tilted.mean);
    CHECK(naive.std_error == tilted.std_error);
    CHECK(naive.exits_c == tilted.exits_c);
}

TEST_CASE("importance sampling is unbiased and sharper") {
    const DPResult dp = solve(kOne, 4);
    const Estimate naive = mc_estimate(kOne, 4, PolicySpec::serve_all(), {0.0}, 20000, 21);
    const Estimate is = is_estimate(kOne, 4, PolicySpec::serve_all(), {0.0}, 20000, 21);
    CHECK(std::abs(is.mean - dp.W[0]) <= 3.0 * is.std_error);
    CHECK(is.std_error / is.mean < naive.std_error / naive.mean);
}

TEST_CASE("bottleneck tilt slows the bottleneck and speeds up arrivals") {
    const JumpTable table(kTwo, 4);
    const ExplicitSolution sol(kTwo);
    const TiltTable t = bottleneck_tilt(table, sol);
    const std::size_t origin = table.lattice.index({0, 0});
    CHECK(t.at(origin, 0) == doctest::Approx(std::exp(sol.beta(0))));
    CHECK(t.at(origin, 1) == doctest::Approx(2.0 * std::exp(-sol.beta(0))));
    CHECK(t.at(origin, 2) == doctest::Approx(1.0));
}

TEST_CASE("policies") {
    const Lattice l(kTwo, 4);
    CHECK(make_policy(PolicySpec::idle(0), kTwo, 4)[0] == 2u);
    CHECK(make_policy(PolicySpec::bottleneck(), kOne, 4) == make_policy(PolicySpec::serve_all(), kOne, 4));
    const PolicyTable b = make_policy(PolicySpec::bottleneck(), kTwo, 4);
    CHECK(b[l.index({0, 0})] == 1u);  // station 1 is the bottleneck at the origin
    CHECK(b[l.index({0, 4})] == 2u);  // full second buffer: only station 2 matters
    CHECK(policy_name(PolicySpec::idle(1)) == "idle-2");
    CHECK_THROWS_AS(make_policy(PolicySpec::idle(5), kTwo, 4), ValidationError);
}

TEST_CASE("custom policy tables round-trip") {
    const Lattice l(kTwo, 2);
    const DPResult r = solve(kTwo, 2);
    std::ostringstream csv;
    csv << "x1,x2,W,Vn,u1,u2\n";
    for (std::size_t idx = 0; idx < l.size(); ++idx) {
        const Vector x = l.point(idx);
        csv << x[0] << "," << x[1] << "," << r.W[idx] << "," << r.Vn[idx] << "," << (r.policy[idx] & 1u) << ","
            << ((r.policy[idx] >> 1) & 1u) << "\n";
    }
    CHECK(policy_from_csv(csv.str(), kTwo, 2) == r.policy);
    CHECK_THROWS_AS(policy_from_csv("x1,x2,u1\n0,0,1\n", kTwo, 2), ValidationError);
    CHECK_THROWS_AS(policy_from_csv("x1,x2,u1,u2\n0,0,1,1\n", kTwo, 2), ValidationError);
}

TEST_CASE("without service, queue 2 never overflows") {
    const Estimate e = mc_estimate(kTwo, 3, PolicySpec::idle_all(), {0.0, 0.5}, 1000, 2);
    CHECK(e.exits_c == 0);
    CHECK_THROWS_AS(mc_estimate(kTwo, 3, PolicySpec::serve_all(), {1.0, 0.0}, 10, 2), ValidationError);
    CHECK_THROWS_AS(mc_estimate(kTwo, 3, PolicySpec::serve_all(), {0.0, 0.0}, 1, 2), ValidationError);
}

TEST_CASE("serve-all and bottleneck-only coincide for one station") {
    const PolicyComparison c = policy_comparison(kOne, 2, {0.0}, 2000, 4);
    REQUIRE(c.rows.size() == 3);
    CHECK(c.rows[0].estimate.mean == c.rows[1].estimate.mean);
    CHECK(c.gap_bottleneck == 0.0);
}
