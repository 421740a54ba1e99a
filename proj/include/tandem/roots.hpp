// Characteristic exponents of the tandem value function.
//
// beta_i is the unique positive root of
//     c + lambda (1 - e^beta) + mu_i (1 - e^-beta) = 0,
// equivalently y = e^beta is the larger root of
//     lambda y^2 - (c + lambda + mu_i) y + mu_i = 0.
// At y = 1 the quadratic equals -c < 0, so the larger root exceeds 1.

#pragma once

#include "tandem/model.hpp"

namespace tandem {

struct RootResult {
    double beta = 0.0;
    double residual = 0.0;  // defect of the characteristic equation at beta
};

/// c + lambda (1 - e^beta) + mu (1 - e^-beta).
double characteristic(double lambda, double mu, double c, double beta);

/// Residual tolerance used by the solvers: 1e-12 (c + lambda + mu).
double root_tolerance(double lambda, double mu, double c);

/// Quadratic closed form, one Newton step, residual check; bisection on
/// [1e-12, 50] if the check fails. Throws ValidationError for non-positive
/// inputs (no positive root exists when lambda <= 0).
RootResult beta_root(double lambda, double mu, double c);

/// Single-server class exponent; same equation with the per-class arrival rate.
RootResult alpha_root(double lambda_i, double mu_i, double c);

/// beta_i for every station.
Vector betas(const NetworkParams& params);

/// b_i = beta_i (e_1 + ... + e_i) (0-based: ones on coordinates 0..i).
Vector b_vector(std::size_t i, const NetworkParams& params);

}  // namespace tandem
