#include "tandem/value.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tandem/parallel.hpp"
#include "tandem/roots.hpp"

namespace tandem {

double tie_tolerance(double value) { return 1e-12 * (1.0 + std::abs(value)); }

IndexSet a_prime(const NetworkParams& params) {
    IndexSet out;
    double running_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < params.J; ++k) {
        if (params.mu[k] <= running_min) {
            out.push_back(k);
            running_min = params.mu[k];
        }
    }
    return out;
}

ExplicitSolution::ExplicitSolution(NetworkParams params) : params_(std::move(params)) {
    params_.validate();
    betas_ = tandem::betas(params_);
    a_prime_ = tandem::a_prime(params_);
    in_a_prime_.assign(params_.J, false);
    for (std::size_t k : a_prime_) {
        in_a_prime_[k] = true;
    }
}

Vector ExplicitSolution::b(std::size_t i) const {
    if (i >= J()) {
        throw std::out_of_range("b: station index out of range");
    }
    Vector out(J(), 0.0);
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(i) + 1, betas_[i]);
    return out;
}

Vector ExplicitSolution::terms(const Vector& x) const {
    check_dimension(x, J());
    Vector t(J());
    double prefix = 0.0;
    for (std::size_t i = 0; i < J(); ++i) {
        prefix += params_.z[i] - x[i];
        t[i] = betas_[i] * prefix;
    }
    return t;
}

IndexSet ExplicitSolution::a_of_x(const ActiveSets& sets) const {
    IndexSet out;
    for (std::size_t i : a_prime_) {
        bool removed = false;
        for (std::size_t j = i + 1; j < J() && sets.is_full(j); ++j) {
            if (params_.mu[i] >= params_.mu[j]) {
                removed = true;
                break;
            }
        }
        if (!removed) {
            out.push_back(i);
        }
    }
    return out;
}

IndexSet ExplicitSolution::a_of_x(const Vector& x) const {
    return a_of_x(active_sets(x, params_, /*require_domain=*/false));
}

ValueBreakdown ExplicitSolution::value(const Vector& x) const {
    if (!in_closure(x, params_)) {
        throw ValidationError("x", "point lies outside the buffer rectangle");
    }
    ValueBreakdown out;
    out.terms = terms(x);
    out.value = *std::min_element(out.terms.begin(), out.terms.end());
    const double tol = tie_tolerance(out.value);
    for (std::size_t i = 0; i < J(); ++i) {
        if (out.terms[i] - out.value <= tol) {
            out.argmin.push_back(i);
        }
    }
    const IndexSet allowed = a_of_x(x);
    out.bottleneck = out.argmin.front();
    for (std::size_t i : out.argmin) {
        if (std::find(allowed.begin(), allowed.end(), i) != allowed.end()) {
            out.bottleneck = i;
            break;
        }
    }
    return out;
}

double ExplicitSolution::operator()(const Vector& x) const { return value(x).value; }

bool ExplicitSolution::lemma1_check(const Vector& x) const {
    const Vector t = terms(x);
    const IndexSet allowed = a_of_x(x);
    if (allowed.empty()) {
        return false;
    }
    double restricted = std::numeric_limits<double>::infinity();
    for (std::size_t i : allowed) {
        restricted = std::min(restricted, t[i]);
    }
    return *std::min_element(t.begin(), t.end()) == restricted;
}

std::optional<Vector> ExplicitSolution::gradient(const Vector& x) const {
    if (classify(x, params_) != BoundaryClass::interior) {
        throw ValidationError("x", "gradient is only defined at interior points");
    }
    const ValueBreakdown v = value(x);
    if (v.argmin.size() != 1) {
        return std::nullopt;
    }
    Vector g = b(v.argmin.front());
    for (double& e : g) {
        e = -e;
    }
    return g;
}

ValueBreakdown value(const Vector& x, const NetworkParams& params) {
    return ExplicitSolution(params).value(x);
}

IndexSet a_of_x(const Vector& x, const NetworkParams& params) {
    return ExplicitSolution(params).a_of_x(x);
}

bool lemma1_check(const Vector& x, const NetworkParams& params) {
    return ExplicitSolution(params).lemma1_check(x);
}

std::optional<Vector> gradient(const Vector& x, const NetworkParams& params) {
    return ExplicitSolution(params).gradient(x);
}

void SingleServerParams::validate() const {
    const std::size_t n = mu.size();
    if (n < 1) {
        throw ValidationError("mu", "need at least one class");
    }
    if (lambda.size() != n) {
        throw ValidationError("lambda", "expected one arrival rate per class");
    }
    if (z.size() != n) {
        throw ValidationError("z", "expected one buffer size per class");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(lambda[i] > 0.0)) {
            throw ValidationError("lambda", "arrival rates must be positive");
        }
        if (!(mu[i] > 0.0)) {
            throw ValidationError("mu", "service rates must be positive");
        }
        if (!(z[i] > 0.0)) {
            throw ValidationError("z", "buffer sizes must be positive");
        }
    }
    if (!(c > 0.0)) {
        throw ValidationError("c", "risk parameter must be positive");
    }
}

const char* const kSingleServerWarning =
    "single-server value formula holds only for sufficiently large c; threshold not checked";

SingleServerResult single_server_value(const Vector& x, const SingleServerParams& params) {
    params.validate();
    check_dimension(x, params.J());
    SingleServerResult out;
    out.warning = kSingleServerWarning;
    out.alphas.resize(params.J());
    auto& bd = out.breakdown;
    bd.terms.resize(params.J());
    for (std::size_t i = 0; i < params.J(); ++i) {
        out.alphas[i] = alpha_root(params.lambda[i], params.mu[i], params.c).beta;
        bd.terms[i] = out.alphas[i] * (params.z[i] - x[i]);
    }
    bd.value = *std::min_element(bd.terms.begin(), bd.terms.end());
    const double tol = tie_tolerance(bd.value);
    for (std::size_t i = 0; i < params.J(); ++i) {
        if (bd.terms[i] - bd.value <= tol) {
            bd.argmin.push_back(i);
        }
    }
    bd.bottleneck = bd.argmin.front();
    return out;
}

std::vector<RegionRow> region_map(const ExplicitSolution& solution, std::size_t resolution) {
    const std::vector<Vector> grid = closed_grid(solution.params().z, resolution);
    std::vector<RegionRow> rows(grid.size());
    parallel_for(grid.size(), [&](std::size_t k) {
        const ValueBreakdown v = solution.value(grid[k]);
        rows[k] = RegionRow{grid[k], v.value, v.argmin, solution.a_of_x(grid[k])};
    });
    return rows;
}

std::vector<RegionRow> single_server_region_map(const SingleServerParams& params, std::size_t resolution) {
    params.validate();
    const std::vector<Vector> grid = closed_grid(params.z, resolution);
    std::vector<RegionRow> rows(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const SingleServerResult r = single_server_value(grid[k], params);
        rows[k] = RegionRow{grid[k], r.breakdown.value, r.breakdown.argmin, {}};
    }
    return rows;
}

}  // namespace tandem
