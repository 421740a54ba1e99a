// Executable verification that the explicit value function is a viscosity
// solution of
//
//   H(DV) = 0 in the interior,  DV . gamma_i = 0 on empty faces,  V = 0 on x_1 = z_1.
//
// Superdifferential elements at x have the form p = -sum_{k in A(x)} nu_k b_k + delta
// with nu a probability vector on A(x) and delta >= 0 on I(x), <= 0 on B(x),
// = 0 on O(x). Restricted to gamma_i . p <= 0 for every i, H(p) equals the
// concave function
//
//   h(nu, delta) = c + lambda (1 - e^{sum nu_k beta_k - delta_1})
//                    + sum_i mu_i (1 - e^{-nu_i beta_i + delta_i - delta_{i+1}})
//
// whose minimum over that polytope is attained at the finitely many points
// (1_k, delta^(r,k)) enumerated by superdiff_extremes.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tandem/value.hpp"

namespace tandem {

/// Served-station index meaning "no service term": delta = beta_k on 0..k and
/// the arrival exponent vanishes.
inline constexpr std::ptrdiff_t kArrivalTerm = -1;

struct ExtremePoint {
    std::size_t k = 0;      // nu = 1_k, k in A(x)
    std::ptrdiff_t r = 0;   // in [s, t-1]; kArrivalTerm when s = -1 and r = s
    std::ptrdiff_t s = 0;   // largest j <= k in B u O, or -1
    std::ptrdiff_t t = 0;   // least j in [k+1, J-1] in I u O, or J
    Vector delta;           // delta_i = beta_k (1{i > r} - 1{i > k})
};

/// For each k in A(x): s, t from I, B, O and one point per r in [s, t-1].
std::vector<ExtremePoint> superdiff_extremes(const Vector& x, const ExplicitSolution& solution);

/// h(1_k, delta^(r,k)): c when r is kArrivalTerm, otherwise
/// c + lambda (1 - e^{beta_k}) + mu_r (1 - e^{-beta_k}).
double h_value(std::size_t k, std::ptrdiff_t r, const ExplicitSolution& solution);

/// h(nu, delta) with delta_{J+1} = 0 implied; `delta` has J entries.
double h_concave(const Vector& nu, const Vector& delta, const ExplicitSolution& solution);

/// p = -sum nu_k b_k + delta.
Vector superdiff_element(const Vector& nu, const Vector& delta, const ExplicitSolution& solution);

struct CheckOptions {
    double tol = 1e-9;           // equality-type and sampled inequalities
    double extreme_tol = 1e-12;  // enumerated h-values
    double strict_margin = 1e-8; // "gamma_i . p < 0" realized as <= -strict_margin
    std::size_t samples = 10000;
    std::uint64_t seed = 20030814;
    std::uint64_t stream = 0;    // per-point stream index; pde_scan sets it
    double box_inflation = 1.0;  // >1 widens the rejection box past the S bounds
};

struct CheckReport {
    bool pass = true;
    bool skipped = false;         // nothing to check (e.g. empty subdifferential)
    std::size_t extremes = 0;
    std::size_t samples = 0;      // accepted random elements
    std::size_t attempts = 0;     // draws including rejections
    std::size_t active = 0;       // samples where the Hamiltonian branch decides
    double min_h = 0.0;
    double max_h = 0.0;
    double min_extreme_h = 0.0;
    double max_violation = 0.0;   // largest breach of the checked inequality
    double max_mismatch = 0.0;    // |h(nu,delta) - H(p)| on paired evaluations
    std::string note;
    std::string violation;        // first violating (k,r) or sample
};

/// Step-1 check: every extreme point has h >= -extreme_tol (with h = c for
/// the arrival term and |h| <= 1e-10 for r = k), the index consistency of A'
/// and A(x) holds, and `samples` random points of the polytope (rejection
/// from the bounding box) satisfy h >= -tol, h >= min over extremes - 1e-9
/// and the box bounds implied by the constraints. Requires x in G.
CheckReport check_superdifferential(const Vector& x, const ExplicitSolution& solution, const CheckOptions& options = {});

/// Superdifferential inequality with the gamma constraint kept only on I(x):
/// samples with gamma_i . p <= -strict_margin on I(x) must give H(p) >= -tol.
/// Skipped when no element meets the strict constraints.
CheckReport check_superdiff_relaxed(const Vector& x, const ExplicitSolution& solution, const CheckOptions& options = {});

/// Subdifferential inequality. Requires B(x) empty (ValidationError otherwise).
/// Skipped when the minimizing term is not unique (empty subdifferential);
/// else samples p = -b_k + delta, delta <= 0 on I(x), and checks
/// min(H(p), min_{i in I} gamma_i . p) <= tol.
CheckReport check_subdifferential(const Vector& x, const ExplicitSolution& solution, const CheckOptions& options = {});

struct PdeScanSummary {
    std::size_t points = 0;
    std::size_t interior_points = 0;
    std::size_t boundary_plus_points = 0;
    std::size_t boundary_c_points = 0;
    std::size_t boundary_o_points = 0;
    std::size_t extremes_checked = 0;
    std::size_t superdiff_samples = 0;
    std::size_t relaxed_samples = 0;
    std::size_t relaxed_empty = 0;         // strict constraint set empty
    std::size_t subdiff_samples = 0;
    std::size_t subdiff_empty = 0;         // tie points, no subdifferential
    std::size_t subdiff_skipped_full = 0;  // points with B(x) nonempty
    double max_residual_interior = 0.0;    // |H(DV)| at differentiable interior points
    double max_h_violation = 0.0;
    double min_extreme_h = 0.0;
    double boundary_o_max_abs_V = 0.0;
    bool pass = true;
    std::vector<std::string> failures;     // first few, for diagnostics
};

/// Runs the classification, super/subdifferential and boundary checks over
/// the closed grid with `resolution` points per axis.
PdeScanSummary pde_scan(const ExplicitSolution& solution, std::size_t resolution, const CheckOptions& options = {});

}  // namespace tandem
