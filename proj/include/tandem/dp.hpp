// Risk-sensitive dynamic program on the scaled lattice G^n = n^{-1} Z_+^J ∩ G.
//
// W(x) = E_x exp(-n c sigma) solves, for the minimizing vertex control u,
//
//   W(x) = [lambda W(x + e_1/n) + sum_i u_i mu_i 1{x_i > 0} W(x - gamma_i/n)]
//          / (c + lambda + sum_i u_i mu_i 1{x_i > 0})
//
// with W = 1 once the jump leaves G, and V^n = -(1/n) log W.

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tandem/model.hpp"

namespace tandem {

/// Raised where a caller needs a converged table and max_iter ran out.
class IterationLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bit i set means station i serves.
using ControlMask = std::uint32_t;
using PolicyTable = std::vector<ControlMask>;

/// Axis 0 holds the points 0, 1/n, ... strictly below z_1 (ceil(n z_1) of
/// them); axis i >= 1 holds 0, ..., floor(n z_i)/n. Products n z_i within
/// 1e-9 of an integer are treated as integral.
class Lattice {
public:
    Lattice(const NetworkParams& params, std::size_t n);

    std::size_t n() const noexcept { return n_; }
    std::size_t J() const noexcept { return dims_.size(); }
    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    std::size_t size() const noexcept { return size_; }

    /// Row-major with axis 0 varying slowest.
    std::size_t index(const std::vector<std::size_t>& coords) const;
    std::vector<std::size_t> coords(std::size_t idx) const;
    std::size_t stride(std::size_t axis) const { return strides_.at(axis); }
    std::size_t coord(std::size_t idx, std::size_t axis) const { return (idx / strides_[axis]) % dims_[axis]; }
    /// c / n, clipped to z so snapped boundary points stay in the rectangle.
    Vector point(std::size_t idx) const;

    /// Nearest lattice point by coordinate rounding (clamped to the axis
    /// range on axes >= 1); nullopt when axis 0 rounds onto or past z_1.
    std::optional<std::size_t> nearest(const Vector& x) const;

private:
    std::size_t n_;
    Vector z_;
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 1;
};

inline constexpr std::size_t kExit = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kNoEdge = kExit - 1;

struct Edge {
    std::optional<std::size_t> target;  // nullopt = jump leaves G
    double rate = 0.0;                  // unscaled by n
    std::ptrdiff_t event = -1;          // -1 arrival, i service at station i
};

/// Outgoing jumps of lattice state `idx` under vertex control `u`.
std::vector<Edge> transitions(const Lattice& lattice, std::size_t idx, ControlMask u, const NetworkParams& params);

/// Precomputed jump targets: arrival[idx] and service[idx * J + i] hold a
/// state index, kExit, or kNoEdge (empty queue).
struct JumpTable {
    Lattice lattice;
    NetworkParams params;
    std::vector<std::size_t> arrival;
    std::vector<std::size_t> service;

    JumpTable(const NetworkParams& params, std::size_t n);
    std::size_t target(std::size_t idx, std::ptrdiff_t event) const {
        return event < 0 ? arrival[idx] : service[idx * params.J + static_cast<std::size_t>(event)];
    }
};

/// Jump-chain ratio at one state for one vertex control.
double bellman_ratio(const JumpTable& table, const Vector& W, std::size_t idx, ControlMask u);

/// One Jacobi sweep: out = min over the 2^J vertices. When `policy` is given
/// it receives the minimizing mask (ties keep the mask with more service).
void bellman_update(const JumpTable& table, const Vector& W, Vector& out, PolicyTable* policy = nullptr);

/// (lambda + sum mu) / (c + lambda + sum mu).
double contraction_factor(const NetworkParams& params);

struct DPOptions {
    double tol = 1e-10;
    std::size_t max_iter = 1000000;
    bool warm_start = false;  // W_0 = exp(-n V) instead of 1
};

struct DPResult {
    Lattice lattice;
    Vector W;
    Vector Vn;
    PolicyTable policy;
    std::size_t iterations = 0;
    double final_delta = 0.0;      // sup |W_k - W_{k-1}|
    double final_rel_delta = 0.0;  // sup |W_k - W_{k-1}| / W_k
    bool converged = false;

    /// V^n at the nearest lattice point; 0 when x rounds onto the overflow face.
    double Vn_at(const Vector& x) const;
};

/// Value iteration. Stops once sup |dW| / W <= tol (1 - rho)/rho, which also
/// bounds the absolute change and so the sup-norm error by tol. Reports
/// converged = false after max_iter sweeps.
DPResult solve(const NetworkParams& params, std::size_t n, const DPOptions& options = {});

struct PolicyEvaluation {
    Vector W;
    std::size_t iterations = 0;
    double final_delta = 0.0;
    bool converged = false;
};

/// Fixed point of the ratio equations for a stationary vertex policy.
PolicyEvaluation evaluate_policy(const NetworkParams& params, std::size_t n, const PolicyTable& policy,
                                 const DPOptions& options = {});

struct ConvergenceRow {
    std::size_t n = 0;
    Vector x0_n;      // lattice point used
    double Vn = 0.0;
    double V = 0.0;   // limit value at x0
    double gap = 0.0; // |Vn - V|
    std::size_t iterations = 0;
};

std::vector<ConvergenceRow> convergence_study(const NetworkParams& params, const std::vector<std::size_t>& n_list,
                                              const Vector& x0, const DPOptions& options = {});

}  // namespace tandem
