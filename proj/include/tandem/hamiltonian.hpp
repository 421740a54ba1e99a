// Hamiltonian of the limiting game at its three levels:
//
//   H(p,u,m) = c + p . v(u,m) + rho(u,m)                  (full)
//   H(p,u)   = inf_m H(p,u,m)                             (rates minimized)
//            = c + lambda (1 - e^{-p_1}) + sum_i u_i mu_i (1 - e^{gamma_i . p})
//   H(p)     = sup_u H(p,u)
//            = c + lambda (1 - e^{-p_1}) + sum_i max(0, mu_i (1 - e^{gamma_i . p}))
//
// The rate minimizer is lambda_bar = lambda e^{-p_1}, mu_bar_i = mu_i e^{gamma_i . p},
// independent of u.

#pragma once

#include <stdexcept>
#include <vector>

#include "tandem/model.hpp"

namespace tandem {

struct RateVector {
    double lambda_bar = 0.0;
    Vector mu_bar;
};

/// Service intensities in [0,1]^J.
using ControlVector = Vector;

/// x log x - x + 1 for x >= 0 (0 log 0 = 0); +inf for x < 0.
double ell(double x);

/// v(u,m) = lambda_bar e_1 - sum_i u_i mu_bar_i gamma_i.
Vector drift(const ControlVector& u, const RateVector& m);

/// rho(u,m) = lambda l(lambda_bar/lambda) + sum_i u_i mu_i l(mu_bar_i/mu_i);
/// +inf when any l argument is negative.
double running_cost(const ControlVector& u, const RateVector& m, const NetworkParams& params);

double hamiltonian(const Vector& p, const ControlVector& u, const RateVector& m, const NetworkParams& params);
double hamiltonian(const Vector& p, const ControlVector& u, const NetworkParams& params);
double hamiltonian(const Vector& p, const NetworkParams& params);

RateVector nominal_rates(const NetworkParams& params);
RateVector optimal_rates(const Vector& p, const NetworkParams& params);

enum class Forcing { serve, idle, free };

const char* to_string(Forcing f);

/// Per-station classification of the u-supremum in H(p): serve when
/// mu_i (1 - e^{gamma_i . p}) > 1e-12, idle when < -1e-12, free otherwise.
std::vector<Forcing> optimal_controls(const Vector& p, const NetworkParams& params);

/// Raised when check_sum_relation is called away from H(p,u) = 0.
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct RelationCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;   // |lhs - rhs|
    double tolerance = 0.0;  // acceptance bound on residual
    bool ok = false;
};

/// lambda_bar + sum u_i mu_bar_i = c + lambda + sum u_i mu_i at the optimal
/// rates. Requires |H(p,u)| <= 1e-9, else PreconditionError. Tolerance
/// 1e-9 (c + lambda + sum mu).
RelationCheck check_sum_relation(const ControlVector& u, const Vector& p, const NetworkParams& params);

/// lambda_bar prod mu_bar_i = lambda prod mu_i at the optimal rates; holds
/// for every p. Tolerance 1e-9 lambda prod mu_i.
RelationCheck check_product_relation(const Vector& p, const NetworkParams& params);

struct IsaacsGrid {
    std::size_t points_per_axis = 33;  // odd keeps the optimal rate on the grid
    double log_half_width = 3.0;       // rates span [e^-w, e^w] times the optimal rate
};

struct IsaacsReport {
    double sup_inf = 0.0;
    double inf_sup = 0.0;
    double gap = 0.0;
    double bound = 0.0;  // 0.05 (1 + |H(p)|)
    bool ok = false;
};

/// Discrete max-min versus min-max of the full Hamiltonian over U = vertices
/// plus edge midpoints of [0,1]^J and a log-uniform product grid of rates.
/// Cost grows as points_per_axis^{J+1}.
IsaacsReport isaacs_check(const Vector& p, const NetworkParams& params, const IsaacsGrid& grid = {});

/// Vertices and edge midpoints of [0,1]^J.
std::vector<ControlVector> control_samples(std::size_t J);

}  // namespace tandem
