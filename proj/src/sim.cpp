#include "tandem/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tandem/hamiltonian.hpp"
#include "tandem/parallel.hpp"
#include "tandem/random.hpp"

namespace tandem {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) {
            cell.pop_back();
        }
        out.push_back(cell);
    }
    return out;
}

double parse_cell(const std::string& cell) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != cell.size()) {
        throw ValidationError("policy", "not a number: '" + cell + "'");
    }
    return v;
}

std::size_t start_state(const Lattice& lattice, const Vector& x0) {
    const auto idx = lattice.nearest(x0);
    if (!idx) {
        throw ValidationError("x0", "starting point must lie in G (x_1 < z_1 on the lattice)");
    }
    return *idx;
}

Estimate summarize(const std::vector<double>& samples, const std::vector<TrajectoryOutcome>& outcomes, std::size_t n) {
    Estimate e;
    e.n_traj = samples.size();
    e.mean = pairwise_sum(samples.data(), samples.size()) / static_cast<double>(samples.size());
    std::vector<double> sq(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double d = samples[i] - e.mean;
        sq[i] = d * d;
    }
    const double var = samples.size() > 1
                           ? pairwise_sum(sq.data(), sq.size()) / static_cast<double>(samples.size() - 1)
                           : 0.0;
    e.std_error = std::sqrt(var / static_cast<double>(samples.size()));
    e.v_hat = -std::log(e.mean) / static_cast<double>(n);
    for (const TrajectoryOutcome& o : outcomes) {
        (o.exit_face == ExitFace::boundary_o ? e.exits_o : e.exits_c) += 1;
    }
    return e;
}

Estimate run_estimate(const NetworkParams& params, std::size_t n, const PolicyTable& policy, const JumpTable& table,
                      const Vector& x0, std::size_t n_traj, std::uint64_t seed, const TiltTable* tilt) {
    if (n_traj < 2) {
        throw ValidationError("paths", "need at least 2 trajectories");
    }
    const std::size_t start = start_state(table.lattice, x0);
    std::vector<TrajectoryOutcome> outcomes(n_traj);
    std::vector<double> samples(n_traj);
    const double ncost = static_cast<double>(n) * params.c;
    parallel_for(n_traj, [&](std::size_t k) {
        std::mt19937_64 rng = make_stream(seed, k);
        outcomes[k] = run_trajectory(table, policy, start, rng, tilt);
        samples[k] = std::exp(-ncost * outcomes[k].sigma + outcomes[k].log_weight);
    });
    return summarize(samples, outcomes, n);
}

}  // namespace

std::string policy_name(const PolicySpec& spec) {
    switch (spec.kind) {
        case PolicyKind::serve_all:
            return "serve-all";
        case PolicyKind::bottleneck:
            return "bottleneck-only";
        case PolicyKind::idle_station:
            return "idle-" + std::to_string(spec.station + 1);
        case PolicyKind::idle_all:
            return "idle-all";
        case PolicyKind::custom:
            return "custom";
    }
    return "unknown";
}

PolicyTable make_policy(const PolicySpec& spec, const NetworkParams& params, std::size_t n) {
    const Lattice lattice(params, n);
    const std::size_t J = params.J;
    const ControlMask all = static_cast<ControlMask>((std::uint64_t{1} << J) - 1);
    switch (spec.kind) {
        case PolicyKind::serve_all:
            return PolicyTable(lattice.size(), all);
        case PolicyKind::idle_all:
            return PolicyTable(lattice.size(), 0);
        case PolicyKind::idle_station:
            if (spec.station >= J) {
                throw ValidationError("policy", "idle station index out of range");
            }
            return PolicyTable(lattice.size(), all & ~(ControlMask{1} << spec.station));
        case PolicyKind::bottleneck: {
            const ExplicitSolution solution(params);
            PolicyTable table(lattice.size(), 0);
            for (std::size_t idx = 0; idx < lattice.size(); ++idx) {
                const Vector x = lattice.point(idx);
                const ValueBreakdown v = solution.value(x);
                const IndexSet allowed = solution.a_of_x(x);
                for (std::size_t i : v.argmin) {
                    if (std::find(allowed.begin(), allowed.end(), i) != allowed.end()) {
                        table[idx] |= ControlMask{1} << i;
                    }
                }
            }
            return table;
        }
        case PolicyKind::custom:
            return policy_from_csv(spec.csv, params, n);
    }
    throw ValidationError("policy", "unknown policy kind");
}

PolicyTable policy_from_csv(const std::string& csv, const NetworkParams& params, std::size_t n) {
    const Lattice lattice(params, n);
    const std::size_t J = params.J;
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("policy", "empty policy table");
    }
    const std::vector<std::string> header = split_csv_line(line);
    std::vector<std::size_t> xcol(J);
    std::vector<std::size_t> ucol(J);
    for (std::size_t i = 0; i < J; ++i) {
        const auto find = [&header](const std::string& name) {
            const auto it = std::find(header.begin(), header.end(), name);
            if (it == header.end()) {
                throw ValidationError("policy", "missing column " + name);
            }
            return static_cast<std::size_t>(it - header.begin());
        };
        xcol[i] = find("x" + std::to_string(i + 1));
        ucol[i] = find("u" + std::to_string(i + 1));
    }
    PolicyTable table(lattice.size(), 0);
    std::vector<bool> seen(lattice.size(), false);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ValidationError("policy", "line " + std::to_string(line_no) + " has the wrong number of cells");
        }
        Vector x(J);
        for (std::size_t i = 0; i < J; ++i) {
            x[i] = parse_cell(cells[xcol[i]]);
        }
        const auto idx = lattice.nearest(x);
        if (!idx) {
            throw ValidationError("policy", "line " + std::to_string(line_no) + " lies off the lattice");
        }
        ControlMask mask = 0;
        for (std::size_t i = 0; i < J; ++i) {
            const double u = parse_cell(cells[ucol[i]]);
            if (u != 0.0 && u != 1.0) {
                throw ValidationError("policy", "controls must be 0 or 1");
            }
            if (u == 1.0) {
                mask |= ControlMask{1} << i;
            }
        }
        table[*idx] = mask;
        seen[*idx] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw ValidationError("policy", "table does not cover every lattice state");
    }
    return table;
}

const char* to_string(ExitFace face) { return face == ExitFace::boundary_o ? "boundary-o" : "boundary-c"; }

TiltTable nominal_tilt(const JumpTable& table) {
    const std::size_t J = table.params.J;
    TiltTable t;
    t.J = J;
    t.rates.resize(table.lattice.size() * (J + 1));
    for (std::size_t idx = 0; idx < table.lattice.size(); ++idx) {
        t.rates[idx * (J + 1)] = table.params.lambda;
        for (std::size_t i = 0; i < J; ++i) {
            t.rates[idx * (J + 1) + i + 1] = table.params.mu[i];
        }
    }
    return t;
}

TiltTable bottleneck_tilt(const JumpTable& table, const ExplicitSolution& solution) {
    const std::size_t J = table.params.J;
    TiltTable t;
    t.J = J;
    t.rates.resize(table.lattice.size() * (J + 1));
    for (std::size_t idx = 0; idx < table.lattice.size(); ++idx) {
        const std::size_t j = solution.value(table.lattice.point(idx)).bottleneck;
        Vector p = solution.b(j);
        for (double& v : p) {
            v = -v;
        }
        const RateVector m = optimal_rates(p, table.params);
        t.rates[idx * (J + 1)] = m.lambda_bar;
        for (std::size_t i = 0; i < J; ++i) {
            t.rates[idx * (J + 1) + i + 1] = m.mu_bar[i];
        }
    }
    return t;
}

TrajectoryOutcome run_trajectory(const JumpTable& table, const PolicyTable& policy, std::size_t start,
                                 std::mt19937_64& rng, const TiltTable* tilt) {
    const NetworkParams& params = table.params;
    const std::size_t J = params.J;
    const double n = static_cast<double>(table.lattice.n());
    if (policy.size() != table.lattice.size() || start >= table.lattice.size()) {
        throw ValidationError("policy", "table size does not match the lattice");
    }
    std::exponential_distribution<double> exp1(1.0);
    std::vector<double> nominal(J + 1);
    std::vector<double> driving(J + 1);
    std::vector<std::size_t> target(J + 1);
    std::vector<std::ptrdiff_t> events(J + 1);

    TrajectoryOutcome out;
    std::size_t state = start;
    for (;;) {
        // Active clocks: arrival plus every served, nonempty station.
        std::size_t active = 0;
        double nominal_total = 0.0;
        double driving_total = 0.0;
        for (std::size_t k = 0; k <= J; ++k) {
            const std::ptrdiff_t event = static_cast<std::ptrdiff_t>(k) - 1;
            const std::size_t t = table.target(state, event);
            if (event >= 0 && (!((policy[state] >> (k - 1)) & 1u) || t == kNoEdge)) {
                continue;
            }
            nominal[active] = event < 0 ? params.lambda : params.mu[k - 1];
            driving[active] = tilt ? tilt->at(state, k) : nominal[active];
            if (!(driving[active] > 0.0)) {
                throw ValidationError("tilt", "tilted rate vanishes where the nominal rate is positive");
            }
            target[active] = t;
            events[active] = event;
            nominal_total += nominal[active];
            driving_total += driving[active];
            ++active;
        }
        const double tau = exp1(rng) / (n * driving_total);
        double pick = std::generate_canonical<double, 53>(rng) * driving_total;
        std::size_t chosen = active - 1;
        for (std::size_t a = 0; a < active; ++a) {
            if (pick < driving[a]) {
                chosen = a;
                break;
            }
            pick -= driving[a];
        }
        out.sigma += tau;
        ++out.jumps;
        if (tilt) {
            out.log_weight += std::log(nominal[chosen] / driving[chosen]) + n * (driving_total - nominal_total) * tau;
        }
        if (target[chosen] == kExit) {
            out.exit_face = events[chosen] < 0 ? ExitFace::boundary_o : ExitFace::boundary_c;
            return out;
        }
        state = target[chosen];
    }
}

TrajectoryOutcome simulate_path(const NetworkParams& params, std::size_t n, const PolicySpec& policy, const Vector& x0,
                                std::uint64_t seed) {
    const JumpTable table(params, n);
    const PolicyTable controls = make_policy(policy, params, n);
    std::mt19937_64 rng = make_stream(seed, 0);
    return run_trajectory(table, controls, start_state(table.lattice, x0), rng);
}

Estimate mc_estimate(const NetworkParams& params, std::size_t n, const PolicySpec& policy, const Vector& x0,
                     std::size_t n_traj, std::uint64_t seed) {
    const JumpTable table(params, n);
    const PolicyTable controls = make_policy(policy, params, n);
    return run_estimate(params, n, controls, table, x0, n_traj, seed, nullptr);
}

Estimate is_estimate(const NetworkParams& params, std::size_t n, const PolicySpec& policy, const Vector& x0,
                     std::size_t n_traj, std::uint64_t seed, TiltKind kind) {
    const JumpTable table(params, n);
    const PolicyTable controls = make_policy(policy, params, n);
    const TiltTable tilt =
        kind == TiltKind::identity ? nominal_tilt(table) : bottleneck_tilt(table, ExplicitSolution(params));
    return run_estimate(params, n, controls, table, x0, n_traj, seed, &tilt);
}

PolicyComparison policy_comparison(const NetworkParams& params, std::size_t n, const Vector& x0, std::size_t n_traj,
                                   std::uint64_t seed) {
    std::vector<PolicySpec> specs{PolicySpec::serve_all(), PolicySpec::bottleneck()};
    for (std::size_t i = 0; i < params.J; ++i) {
        specs.push_back(PolicySpec::idle(i));
    }
    const JumpTable table(params, n);
    const ExplicitSolution solution(params);
    PolicyComparison out;
    out.bottleneck_at_x0 = solution.value(table.lattice.point(start_state(table.lattice, x0))).bottleneck;
    for (const PolicySpec& spec : specs) {
        PolicyRow row;
        row.name = policy_name(spec);
        row.estimate = run_estimate(params, n, make_policy(spec, params, n), table, x0, n_traj, seed, nullptr);
        const double nn = static_cast<double>(n);
        const double hi_mean = row.estimate.mean + 2.0 * row.estimate.std_error;
        const double lo_mean = row.estimate.mean - 2.0 * row.estimate.std_error;
        row.v_lo = -std::log(hi_mean) / nn;
        row.v_hi = lo_mean > 0.0 ? -std::log(lo_mean) / nn : std::numeric_limits<double>::infinity();
        out.rows.push_back(std::move(row));
    }
    const double serve_all = out.rows[0].estimate.v_hat;
    out.gap_bottleneck = std::abs(serve_all - out.rows[1].estimate.v_hat);
    out.gap_idle_bottleneck = std::abs(serve_all - out.rows[2 + out.bottleneck_at_x0].estimate.v_hat);
    return out;
}

double pairwise_sum(const double* values, std::size_t count) {
    if (count <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            s += values[i];
        }
        return s;
    }
    const std::size_t half = count / 2;
    return pairwise_sum(values, half) + pairwise_sum(values + half, count - half);
}

}  // namespace tandem
