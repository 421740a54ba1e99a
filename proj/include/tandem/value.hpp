// Explicit limit value function of the tandem overflow problem,
//
//     V(x) = min_i b_i . (z - x),
//
// its bottleneck index sets and the single-server multiclass analogue.

#pragma once

#include <optional>
#include <string>

#include "tandem/model.hpp"

namespace tandem {

struct ValueBreakdown {
    Vector terms;      // t_i = b_i . (z - x)
    double value = 0;  // min_i t_i
    IndexSet argmin;   // every index within the tie tolerance of the minimum
    std::size_t bottleneck = 0;  // least index of argmin within A(x)
};

/// Tolerance for treating two terms as tied: 1e-12 (1 + |value|).
double tie_tolerance(double value);

/// k belongs to A' iff mu_k <= mu_l for every l < k. Always contains 0.
IndexSet a_prime(const NetworkParams& params);

/// Caches the exponents and A' of one instance; all queries are const and
/// safe to share between threads.
class ExplicitSolution {
public:
    explicit ExplicitSolution(NetworkParams params);

    const NetworkParams& params() const noexcept { return params_; }
    std::size_t J() const noexcept { return params_.J; }
    const Vector& betas() const noexcept { return betas_; }
    double beta(std::size_t i) const { return betas_.at(i); }
    Vector b(std::size_t i) const;
    const IndexSet& a_prime() const noexcept { return a_prime_; }
    bool in_a_prime(std::size_t i) const { return in_a_prime_.at(i); }

    /// Terms computed from running prefix sums of z - x, so indices whose
    /// extra coordinates are exactly zero share bit-identical sums.
    Vector terms(const Vector& x) const;

    /// Requires x in the closed rectangle.
    ValueBreakdown value(const Vector& x) const;
    double operator()(const Vector& x) const;

    /// A' minus every i having some j > i with [i+1, j] inside B(x) and
    /// mu_i >= mu_j. Accepts points of the closed rectangle; on the overflow
    /// face the same rule is applied to the coordinates past the first.
    IndexSet a_of_x(const Vector& x) const;
    IndexSet a_of_x(const ActiveSets& sets) const;

    /// min over all indices equals min over A(x), compared exactly.
    bool lemma1_check(const Vector& x) const;

    /// DV(x) = -b_j at interior points with a unique minimizer j; nullopt
    /// where several terms tie. Throws for points off the interior.
    std::optional<Vector> gradient(const Vector& x) const;

private:
    NetworkParams params_;
    Vector betas_;
    IndexSet a_prime_;
    std::vector<bool> in_a_prime_;
};

/// Convenience wrappers building an ExplicitSolution per call.
ValueBreakdown value(const Vector& x, const NetworkParams& params);
IndexSet a_of_x(const Vector& x, const NetworkParams& params);
bool lemma1_check(const Vector& x, const NetworkParams& params);
std::optional<Vector> gradient(const Vector& x, const NetworkParams& params);

/// Single server shared by J classes with their own arrival rates.
struct SingleServerParams {
    Vector lambda;
    Vector mu;
    Vector z;
    double c = 0.0;

    std::size_t J() const noexcept { return mu.size(); }
    void validate() const;
};

struct SingleServerResult {
    ValueBreakdown breakdown;  // bottleneck = class to serve
    Vector alphas;
    std::string warning;
};

extern const char* const kSingleServerWarning;

/// min_i alpha_i (z_i - x_i). Valid only for c large enough; the threshold is
/// not computed, the result always carries kSingleServerWarning.
SingleServerResult single_server_value(const Vector& x, const SingleServerParams& params);

struct RegionRow {
    Vector x;
    double value = 0.0;
    IndexSet argmin;
    IndexSet a_of_x;
};

/// Bottleneck map over the closed grid with `resolution` points per axis.
std::vector<RegionRow> region_map(const ExplicitSolution& solution, std::size_t resolution);

/// Priority map of the single-server variant (a_of_x left empty).
std::vector<RegionRow> single_server_region_map(const SingleServerParams& params, std::size_t resolution);

}  // namespace tandem
