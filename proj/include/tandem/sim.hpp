// Event-driven simulation of the scaled network and Monte Carlo estimators
// of E exp(-n c sigma).
//
// Each trajectory draws from its own stream make_stream(seed, index), so
// estimates do not depend on the worker count. The importance-sampling
// estimator runs the chain under state-dependent tilted rates and carries
// the exact likelihood ratio of the two jump processes.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tandem/dp.hpp"
#include "tandem/value.hpp"

namespace tandem {

enum class PolicyKind { serve_all, bottleneck, idle_station, idle_all, custom };

struct PolicySpec {
    PolicyKind kind = PolicyKind::serve_all;
    std::size_t station = 0;  // idle_station only
    std::string csv;          // custom only: solve-dp table text (x1..xJ, ..., u1..uJ)

    static PolicySpec serve_all() { return {}; }
    static PolicySpec bottleneck() { return {PolicyKind::bottleneck, 0, {}}; }
    static PolicySpec idle(std::size_t i) { return {PolicyKind::idle_station, i, {}}; }
    static PolicySpec idle_all() { return {PolicyKind::idle_all, 0, {}}; }
    static PolicySpec custom(std::string csv) { return {PolicyKind::custom, 0, std::move(csv)}; }
};

/// "serve-all", "bottleneck-only", "idle-<i>" (1-based), "idle-all", "custom".
std::string policy_name(const PolicySpec& spec);

/// Vertex control per lattice state. bottleneck serves exactly the indices of
/// argmin ∩ A(x); idle_station serves every station except `station`.
PolicyTable make_policy(const PolicySpec& spec, const NetworkParams& params, std::size_t n);

/// Reads u1..uJ by the x1..xJ columns; every lattice state must appear.
PolicyTable policy_from_csv(const std::string& csv, const NetworkParams& params, std::size_t n);

enum class ExitFace { boundary_o, boundary_c };

const char* to_string(ExitFace face);

struct TrajectoryOutcome {
    double sigma = 0.0;
    ExitFace exit_face = ExitFace::boundary_o;
    std::size_t jumps = 0;
    double log_weight = 0.0;  // log dP/dQ; 0 for the naive estimator
};

/// Per-state rates (arrival, then each station) that drive the simulated
/// chain; the nominal table reproduces the original model.
struct TiltTable {
    std::size_t J = 0;
    std::vector<double> rates;  // (J + 1) per state

    double at(std::size_t idx, std::size_t k) const { return rates[idx * (J + 1) + k]; }
};

TiltTable nominal_tilt(const JumpTable& table);

/// Optimal adversary rates at p = -b_j, j the bottleneck of the state.
TiltTable bottleneck_tilt(const JumpTable& table, const ExplicitSolution& solution);

/// Shared kernel: runs from lattice state `start` until the chain leaves G.
/// With `tilt` equal to the nominal table the path and weight match the
/// naive run exactly.
TrajectoryOutcome run_trajectory(const JumpTable& table, const PolicyTable& policy, std::size_t start,
                                 std::mt19937_64& rng, const TiltTable* tilt = nullptr);

/// One naive trajectory from x0 (rounded to the lattice) on stream (seed, 0).
TrajectoryOutcome simulate_path(const NetworkParams& params, std::size_t n, const PolicySpec& policy, const Vector& x0,
                                std::uint64_t seed);

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_traj = 0;
    double v_hat = 0.0;  // -(1/n) log mean
    std::size_t exits_o = 0;
    std::size_t exits_c = 0;
};

Estimate mc_estimate(const NetworkParams& params, std::size_t n, const PolicySpec& policy, const Vector& x0,
                     std::size_t n_traj, std::uint64_t seed);

enum class TiltKind { bottleneck, identity };

Estimate is_estimate(const NetworkParams& params, std::size_t n, const PolicySpec& policy, const Vector& x0,
                     std::size_t n_traj, std::uint64_t seed, TiltKind tilt = TiltKind::bottleneck);

struct PolicyRow {
    std::string name;
    Estimate estimate;
    double v_lo = 0.0;  // v_hat range from mean -/+ 2 stderr
    double v_hi = 0.0;
};

struct PolicyComparison {
    std::vector<PolicyRow> rows;     // serve-all, bottleneck-only, idle-1..idle-J
    double gap_bottleneck = 0.0;     // |v_hat(serve-all) - v_hat(bottleneck-only)|
    double gap_idle_bottleneck = 0.0;  // |v_hat(serve-all) - v_hat(idle the bottleneck at x0)|
    std::size_t bottleneck_at_x0 = 0;
};

/// Naive estimates with common random numbers across policies.
PolicyComparison policy_comparison(const NetworkParams& params, std::size_t n, const Vector& x0, std::size_t n_traj,
                                   std::uint64_t seed);

/// Pairwise (cascade) sum.
double pairwise_sum(const double* values, std::size_t count);

}  // namespace tandem
